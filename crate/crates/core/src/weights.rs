//! Non-negative weight (utility) functions.

use std::fmt;
use std::str::FromStr;

use crate::dist::MonotoneMap;
use crate::error::{Error, Result};
use crate::grammar::parse_params;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightFn {
    /// `1`; recovers the unweighted generating functions.
    One,
    /// `x`
    Identity,
    /// `1 / x`, defined for `x > 0`.
    Reciprocal,
    /// `x + b`
    Shifted { b: f64 },
    /// `x^m`, `m > 0`.
    Power { m: f64 },
    /// `1 / (x + b)`
    ReciprocalShifted { b: f64 },
    /// `sqrt(w(x))`
    Sqrt(Box<WeightFn>),
    /// `w(x)^2`
    Square(Box<WeightFn>),
    /// `w(map(x))`
    Composed { outer: Box<WeightFn>, map: MonotoneMap },
}

impl WeightFn {
    pub fn power(m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::domain(format!("power weight needs m > 0, got {m}")));
        }
        Ok(WeightFn::Power { m })
    }

    pub fn shifted(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::domain(format!("shifted weight needs b > 0, got {b}")));
        }
        Ok(WeightFn::Shifted { b })
    }

    pub fn reciprocal_shifted(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::domain(format!(
                "reciprocal-shifted weight needs b > 0, got {b}"
            )));
        }
        Ok(WeightFn::ReciprocalShifted { b })
    }

    pub fn sqrt_of(&self) -> Self {
        WeightFn::Sqrt(Box::new(self.clone()))
    }

    pub fn square_of(&self) -> Self {
        WeightFn::Square(Box::new(self.clone()))
    }

    /// `(sqrt-of w, square-of w)`, the pair used by the Cauchy–Schwarz bounds.
    pub fn derived(&self) -> (Self, Self) {
        (self.sqrt_of(), self.square_of())
    }

    pub fn compose(&self, map: MonotoneMap) -> Self {
        WeightFn::Composed {
            outer: Box::new(self.clone()),
            map,
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            WeightFn::One => true,
            WeightFn::Sqrt(w) | WeightFn::Square(w) => w.is_constant(),
            WeightFn::Composed { outer, .. } => outer.is_constant(),
            _ => false,
        }
    }

    /// Raw evaluation used inside integrands; no domain check.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match self {
            WeightFn::One => 1.0,
            WeightFn::Identity => x,
            WeightFn::Reciprocal => 1.0 / x,
            WeightFn::Shifted { b } => x + b,
            WeightFn::Power { m } => x.powf(*m),
            WeightFn::ReciprocalShifted { b } => 1.0 / (x + b),
            WeightFn::Sqrt(w) => w.value(x).sqrt(),
            WeightFn::Square(w) => {
                let v = w.value(x);
                v * v
            }
            WeightFn::Composed { outer, map } => outer.value(map.apply(x)),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::domain(format!("weight argument must be finite, got {x}")));
        }
        let v = self.value(x);
        if !v.is_finite() || v < 0.0 {
            return Err(Error::domain(format!("{self} is not defined at x = {x}")));
        }
        Ok(v)
    }
}

impl fmt::Display for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFn::One => write!(f, "one"),
            WeightFn::Identity => write!(f, "x"),
            WeightFn::Reciprocal => write!(f, "invx"),
            WeightFn::Shifted { b } => write!(f, "shift:b={b}"),
            WeightFn::Power { m } => write!(f, "pow:m={m}"),
            WeightFn::ReciprocalShifted { b } => write!(f, "invshift:b={b}"),
            WeightFn::Sqrt(w) => write!(f, "sqrt({w})"),
            WeightFn::Square(w) => write!(f, "square({w})"),
            WeightFn::Composed { outer, map } => write!(f, "{outer}∘{map}"),
        }
    }
}

impl FromStr for WeightFn {
    type Err = Error;

    /// `one | x | invx | pow:m=<v> | shift:b=<v> | invshift:b=<v>`
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (id, rest) = match s.split_once(':') {
            Some((id, rest)) => (id, Some(rest)),
            None => (s, None),
        };
        let params = parse_params(rest.unwrap_or(""))?;
        let get = |key: &str| -> Result<f64> {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::Parse(format!("weight `{s}` is missing `{key}`")))
        };
        let no_params = |w: WeightFn| -> Result<WeightFn> {
            if params.is_empty() {
                Ok(w)
            } else {
                Err(Error::Parse(format!("weight `{id}` takes no parameters")))
            }
        };
        match id {
            "one" | "1" => no_params(WeightFn::One),
            "x" => no_params(WeightFn::Identity),
            "invx" => no_params(WeightFn::Reciprocal),
            "pow" => WeightFn::power(get("m")?),
            "shift" => WeightFn::shifted(get("b")?),
            "invshift" => WeightFn::reciprocal_shifted(get("b")?),
            other => Err(Error::Parse(format!("unknown weight `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_values() {
        assert_eq!(WeightFn::Identity.eval(3.5).unwrap(), 3.5);
        assert_eq!(WeightFn::power(2.0).unwrap().eval(3.0).unwrap(), 9.0);
        assert_eq!(WeightFn::One.eval(17.0).unwrap(), 1.0);
    }

    #[test]
    fn reciprocal_rejects_zero() {
        assert!(WeightFn::Reciprocal.eval(0.0).is_err());
        assert_eq!(WeightFn::Reciprocal.eval(4.0).unwrap(), 0.25);
    }

    #[test]
    fn derived_weights() {
        let (s, q) = WeightFn::Identity.derived();
        assert_eq!(s.eval(4.0).unwrap(), 2.0);
        assert_eq!(q.eval(4.0).unwrap(), 16.0);
        let p2 = WeightFn::power(2.0).unwrap();
        assert!((p2.sqrt_of().eval(5.0).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn parse_grammar() {
        assert_eq!("one".parse::<WeightFn>().unwrap(), WeightFn::One);
        assert_eq!("x".parse::<WeightFn>().unwrap(), WeightFn::Identity);
        assert_eq!("invx".parse::<WeightFn>().unwrap(), WeightFn::Reciprocal);
        assert_eq!(
            "pow:m=2".parse::<WeightFn>().unwrap(),
            WeightFn::Power { m: 2.0 }
        );
        assert_eq!(
            "shift:b=1".parse::<WeightFn>().unwrap(),
            WeightFn::Shifted { b: 1.0 }
        );
        assert!("bogus".parse::<WeightFn>().is_err());
        assert!("pow".parse::<WeightFn>().is_err());
        assert!("pow:m=-1".parse::<WeightFn>().is_err());
        assert!("x:m=1".parse::<WeightFn>().is_err());
        let w: WeightFn = "shift:b=0.5".parse().unwrap();
        assert_eq!(w.to_string().parse::<WeightFn>().unwrap(), w);
    }

    fn any_weight() -> impl Strategy<Value = WeightFn> {
        prop_oneof![
            Just(WeightFn::One),
            Just(WeightFn::Identity),
            Just(WeightFn::Reciprocal),
            (0.1f64..5.0).prop_map(|b| WeightFn::Shifted { b }),
            (0.1f64..4.0).prop_map(|m| WeightFn::Power { m }),
            (0.1f64..5.0).prop_map(|b| WeightFn::ReciprocalShifted { b }),
        ]
    }

    proptest! {
        #[test]
        fn square_of_sqrt_is_identity(w in any_weight(), x in 0.01f64..50.0) {
            let back = w.sqrt_of().square_of().value(x);
            let orig = w.value(x);
            prop_assert!((back - orig).abs() <= 1e-12 * orig.abs().max(1.0));
        }

        #[test]
        fn weights_are_non_negative(w in any_weight(), x in 0.001f64..100.0) {
            prop_assert!(w.eval(x).unwrap() >= 0.0);
        }
    }
}
