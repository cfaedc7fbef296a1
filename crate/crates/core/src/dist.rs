//! Probability models on (mostly) non-negative supports.
//!
//! Every model exposes density, CDF, survival, hazard, quantile, inverse-CDF
//! sampling and log-likelihood. Besides the closed-form families there are
//! three derived kinds: a monotone transform of another model, the
//! proportional-hazards power of another model, and `Numeric`, an arbitrary
//! non-negative integrable kernel normalised by quadrature. The last one
//! carries escort, mixture and equilibrium constructions.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grammar::parse_params;
use crate::integrate::{integrate_pieces, Estimate, QuadConfig, QuadError};

/// Strictly monotone, differentiable, invertible maps used for transformed
/// random variables and composed weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonotoneMap {
    Identity,
    /// `a * x + b`, `a != 0`.
    Affine { a: f64, b: f64 },
    Sqrt,
    Reciprocal,
}

impl MonotoneMap {
    pub fn affine(a: f64, b: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain(format!(
                "affine map needs finite a != 0 and finite b (a = {a}, b = {b})"
            )));
        }
        Ok(MonotoneMap::Affine { a, b })
    }

    pub fn shift(b: f64) -> Self {
        MonotoneMap::Affine { a: 1.0, b }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            MonotoneMap::Identity => x,
            MonotoneMap::Affine { a, b } => a * x + b,
            MonotoneMap::Sqrt => x.sqrt(),
            MonotoneMap::Reciprocal => 1.0 / x,
        }
    }

    #[inline]
    pub fn inverse(&self, y: f64) -> f64 {
        match *self {
            MonotoneMap::Identity => y,
            MonotoneMap::Affine { a, b } => (y - b) / a,
            MonotoneMap::Sqrt => y * y,
            MonotoneMap::Reciprocal => 1.0 / y,
        }
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            MonotoneMap::Identity => 1.0,
            MonotoneMap::Affine { a, .. } => a,
            MonotoneMap::Sqrt => 0.5 / x.sqrt(),
            MonotoneMap::Reciprocal => -1.0 / (x * x),
        }
    }

    pub fn is_increasing(&self) -> bool {
        match *self {
            MonotoneMap::Identity | MonotoneMap::Sqrt => true,
            MonotoneMap::Affine { a, .. } => a > 0.0,
            MonotoneMap::Reciprocal => false,
        }
    }

    /// Image of `[lo, hi]`, ordered ascending. Fails where the map is not
    /// monotone and finite on the interior of the interval.
    pub fn map_interval(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        match *self {
            MonotoneMap::Sqrt if lo < 0.0 => {
                return Err(Error::domain("sqrt map needs a non-negative support"))
            }
            MonotoneMap::Reciprocal if lo < 0.0 => {
                return Err(Error::domain("reciprocal map needs a non-negative support"))
            }
            _ => {}
        }
        let (p, q) = (self.apply(lo), self.apply(hi));
        Ok(if p <= q { (p, q) } else { (q, p) })
    }
}

impl fmt::Display for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonotoneMap::Identity => write!(f, "id"),
            MonotoneMap::Affine { a, b } => write!(f, "affine:a={a},b={b}"),
            MonotoneMap::Sqrt => write!(f, "sqrt"),
            MonotoneMap::Reciprocal => write!(f, "inv"),
        }
    }
}

impl FromStr for MonotoneMap {
    type Err = Error;

    /// `id | sqrt | inv | affine:a=<v>,b=<v> | shift:b=<v>`
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (id, rest) = s.split_once(':').unwrap_or((s, ""));
        let params = parse_params(rest)?;
        let get = |k: &str, default: Option<f64>| -> Result<f64> {
            params
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| *v)
                .or(default)
                .ok_or_else(|| Error::Parse(format!("map `{s}` is missing `{k}`")))
        };
        match id {
            "id" | "identity" => Ok(MonotoneMap::Identity),
            "sqrt" => Ok(MonotoneMap::Sqrt),
            "inv" | "reciprocal" => Ok(MonotoneMap::Reciprocal),
            "affine" => MonotoneMap::affine(get("a", None)?, get("b", Some(0.0))?),
            "shift" => Ok(MonotoneMap::shift(get("b", None)?)),
            other => Err(Error::Parse(format!("unknown map `{other}`"))),
        }
    }
}

type Kernel = dyn Fn(f64) -> f64 + Send + Sync;

/// A density known only up to a constant, normalised once by quadrature.
pub struct NumericDensity {
    label: String,
    kernel: Box<Kernel>,
    lo: f64,
    hi: f64,
    normalizer: f64,
    breaks: Vec<f64>,
    quad: QuadConfig,
}

impl fmt::Debug for NumericDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumericDensity")
            .field("label", &self.label)
            .field("support", &(self.lo, self.hi))
            .field("normalizer", &self.normalizer)
            .finish()
    }
}

impl NumericDensity {
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

#[derive(Debug, Clone)]
pub enum Distribution {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    /// `f(x) = exp(-1 / (lambda x)) / (lambda x^2)`, `x > 0`.
    InvertedExponential { lambda: f64 },
    Weibull { shape: f64, scale: f64 },
    /// Pareto type I with shape `c` on `x > scale`.
    Pareto { shape: f64, scale: f64 },
    /// `f(x) = a l x^-(a+1) exp(-l x^-a)`, `x > 0` (inverse-Weibull form).
    Gumbel2 { shape: f64, scale: f64 },
    /// `2x` on `(0, 1)`.
    TriangularUp,
    /// `2(1 - x)` on `(0, 1)`.
    TriangularDown,
    Transformed { base: Arc<Distribution>, map: MonotoneMap },
    /// Survival `base_survival^power`.
    ProportionalHazards { base: Arc<Distribution>, power: f64 },
    Numeric(Arc<NumericDensity>),
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain(format!("{name} must be a positive real, got {v}")))
    }
}

const BREAK_PROBS: [f64; 7] = [1e-3, 0.05, 0.25, 0.5, 0.75, 0.95, 0.999];

impl Distribution {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::domain(format!("uniform needs a < b, got ({a}, {b})")));
        }
        Ok(Distribution::Uniform { a, b })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Ok(Distribution::Exponential {
            rate: positive("exponential rate", rate)?,
        })
    }

    pub fn inverted_exponential(lambda: f64) -> Result<Self> {
        Ok(Distribution::InvertedExponential {
            lambda: positive("inverted-exponential lambda", lambda)?,
        })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Ok(Distribution::Weibull {
            shape: positive("weibull shape", shape)?,
            scale: positive("weibull scale", scale)?,
        })
    }

    pub fn pareto(shape: f64, scale: f64) -> Result<Self> {
        Ok(Distribution::Pareto {
            shape: positive("pareto shape", shape)?,
            scale: positive("pareto scale", scale)?,
        })
    }

    /// Lomax as Pareto-I(`c`, 1) shifted left by one.
    pub fn lomax(c: f64) -> Result<Self> {
        Distribution::pareto(c, 1.0)?.transformed(MonotoneMap::shift(-1.0))
    }

    pub fn gumbel2(shape: f64, scale: f64) -> Result<Self> {
        Ok(Distribution::Gumbel2 {
            shape: positive("gumbel2 shape", shape)?,
            scale: positive("gumbel2 scale", scale)?,
        })
    }

    /// Distribution of `map(X)`.
    pub fn transformed(&self, map: MonotoneMap) -> Result<Self> {
        if map == MonotoneMap::Identity {
            return Ok(self.clone());
        }
        let (lo, hi) = self.support();
        map.map_interval(lo, hi)?;
        Ok(Distribution::Transformed {
            base: Arc::new(self.clone()),
            map,
        })
    }

    /// Proportional-hazards model with survival `S(x)^power`.
    pub fn proportional_hazards(&self, power: f64) -> Result<Self> {
        let power = positive("proportional-hazards power", power)?;
        if power == 1.0 {
            return Ok(self.clone());
        }
        Ok(match self {
            Distribution::Exponential { rate } => Distribution::Exponential {
                rate: rate * power,
            },
            Distribution::Weibull { shape, scale } => Distribution::Weibull {
                shape: *shape,
                scale: scale * power.powf(-1.0 / shape),
            },
            Distribution::Pareto { shape, scale } => Distribution::Pareto {
                shape: shape * power,
                scale: *scale,
            },
            _ => Distribution::ProportionalHazards {
                base: Arc::new(self.clone()),
                power,
            },
        })
    }

    /// Wrap a non-negative kernel on `[lo, hi]` as a density. `breaks` are
    /// interior points marking where the kernel's mass lives; they seed the
    /// quadrature panels.
    pub fn numeric<K>(
        label: impl Into<String>,
        kernel: K,
        lo: f64,
        hi: f64,
        breaks: Vec<f64>,
    ) -> Result<Self>
    where
        K: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::domain(format!("numeric support [{lo}, {hi}] is empty")));
        }
        let mut breaks: Vec<f64> = breaks
            .into_iter()
            .filter(|b| b.is_finite() && *b > lo && *b < hi)
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let quad = QuadConfig::default();
        let mut points = Vec::with_capacity(breaks.len() + 2);
        points.push(lo);
        points.extend_from_slice(&breaks);
        points.push(hi);
        let z = integrate_pieces(&kernel, &points, &quad)
            .map_err(|e| Error::divergent(format!("normaliser of {label}"), e))?
            .value;
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::domain(format!(
                "normaliser of {label} is not positive ({z})"
            )));
        }
        Ok(Distribution::Numeric(Arc::new(NumericDensity {
            label,
            kernel: Box::new(kernel),
            lo,
            hi,
            normalizer: z,
            breaks,
            quad,
        })))
    }

    pub fn model_id(&self) -> &'static str {
        match self {
            Distribution::Uniform { .. } => "uniform",
            Distribution::Exponential { .. } => "exp",
            Distribution::InvertedExponential { .. } => "invexp",
            Distribution::Weibull { .. } => "weibull",
            Distribution::Pareto { .. } => "pareto1",
            Distribution::Gumbel2 { .. } => "gumbel2",
            Distribution::TriangularUp => "tri-up",
            Distribution::TriangularDown => "tri-down",
            Distribution::Transformed { .. } => "transformed",
            Distribution::ProportionalHazards { .. } => "ph",
            Distribution::Numeric(_) => "numeric",
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Distribution::Uniform { a, b } => (*a, *b),
            Distribution::Exponential { .. }
            | Distribution::InvertedExponential { .. }
            | Distribution::Weibull { .. }
            | Distribution::Gumbel2 { .. } => (0.0, f64::INFINITY),
            Distribution::Pareto { scale, .. } => (*scale, f64::INFINITY),
            Distribution::TriangularUp | Distribution::TriangularDown => (0.0, 1.0),
            Distribution::Transformed { base, map } => {
                let (lo, hi) = base.support();
                map.map_interval(lo, hi).expect("validated at construction")
            }
            Distribution::ProportionalHazards { base, .. } => base.support(),
            Distribution::Numeric(n) => (n.lo, n.hi),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x.is_nan() || x < lo || x > hi {
            return 0.0;
        }
        match self {
            Distribution::Uniform { a, b } => 1.0 / (b - a),
            Distribution::Exponential { rate } => rate * (-rate * x).exp(),
            Distribution::InvertedExponential { lambda } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let lx = lambda * x;
                (-1.0 / lx).exp() / (lx * x)
            }
            Distribution::Weibull { shape, scale } => {
                let z = x / scale;
                if z == 0.0 {
                    return match shape.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => 1.0 / scale,
                        _ => 0.0,
                    };
                }
                let zp = z.powf(*shape);
                shape / scale * zp / z * (-zp).exp()
            }
            Distribution::Pareto { shape, scale } => {
                shape / scale * (scale / x).powf(shape + 1.0)
            }
            Distribution::Gumbel2 { shape, scale } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let xa = x.powf(-shape);
                let e = (-scale * xa).exp();
                if e == 0.0 {
                    return 0.0;
                }
                shape * scale * xa / x * e
            }
            Distribution::TriangularUp => 2.0 * x,
            Distribution::TriangularDown => 2.0 * (1.0 - x),
            Distribution::Transformed { base, map } => {
                let u = map.inverse(x);
                let fu = base.density(u);
                if fu == 0.0 {
                    return 0.0;
                }
                fu / map.derivative(u).abs()
            }
            Distribution::ProportionalHazards { base, power } => {
                let f = base.density(x);
                if f == 0.0 {
                    return 0.0;
                }
                power * base.survival(x).powf(power - 1.0) * f
            }
            Distribution::Numeric(n) => {
                let k = (n.kernel)(x);
                if k > 0.0 {
                    k / n.normalizer
                } else {
                    0.0
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        match self {
            Distribution::Uniform { a, b } => (x - a) / (b - a),
            Distribution::Exponential { rate } => -(-rate * x).exp_m1(),
            Distribution::Weibull { shape, scale } => -(-(x / scale).powf(*shape)).exp_m1(),
            Distribution::InvertedExponential { lambda } => (-1.0 / (lambda * x)).exp(),
            Distribution::Gumbel2 { shape, scale } => (-scale * x.powf(-shape)).exp(),
            Distribution::TriangularUp => x * x,
            _ => 1.0 - self.survival(x),
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 1.0;
        }
        if x >= hi {
            return 0.0;
        }
        match self {
            Distribution::Uniform { a, b } => (b - x) / (b - a),
            Distribution::Exponential { rate } => (-rate * x).exp(),
            Distribution::Weibull { shape, scale } => (-(x / scale).powf(*shape)).exp(),
            Distribution::Pareto { shape, scale } => (scale / x).powf(*shape),
            Distribution::InvertedExponential { lambda } => -(-1.0 / (lambda * x)).exp_m1(),
            Distribution::Gumbel2 { shape, scale } => -(-scale * x.powf(-shape)).exp_m1(),
            Distribution::TriangularUp => 1.0 - x * x,
            Distribution::TriangularDown => (1.0 - x) * (1.0 - x),
            Distribution::Transformed { base, map } => {
                let u = map.inverse(x);
                if map.is_increasing() {
                    base.survival(u)
                } else {
                    base.cdf(u)
                }
            }
            Distribution::ProportionalHazards { base, power } => base.survival(x).powf(*power),
            Distribution::Numeric(n) => {
                let mut pts = vec![x];
                pts.extend(n.breaks.iter().copied().filter(|b| *b > x));
                pts.push(n.hi);
                match integrate_pieces(|y| (n.kernel)(y), &pts, &n.quad) {
                    Ok(est) => (est.value / n.normalizer).clamp(0.0, 1.0),
                    Err(_) => f64::NAN,
                }
            }
        }
    }

    pub fn hazard(&self, x: f64) -> Result<f64> {
        let s = self.survival(x);
        if !(s > 0.0) {
            return Err(Error::domain(format!(
                "hazard undefined: survival is zero at x = {x}"
            )));
        }
        Ok(self.density(x) / s)
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {u}")));
        }
        Ok(match self {
            Distribution::Uniform { a, b } => a + u * (b - a),
            Distribution::Exponential { rate } => -(-u).ln_1p() / rate,
            Distribution::Weibull { shape, scale } => scale * (-(-u).ln_1p()).powf(1.0 / shape),
            Distribution::Pareto { shape, scale } => scale * (-(-u).ln_1p() / shape).exp(),
            Distribution::InvertedExponential { lambda } => -1.0 / (lambda * u.ln()),
            Distribution::Gumbel2 { shape, scale } => (-scale / u.ln()).powf(1.0 / shape),
            Distribution::TriangularUp => u.sqrt(),
            Distribution::TriangularDown => 1.0 - (1.0 - u).sqrt(),
            Distribution::Transformed { base, map } => {
                if map.is_increasing() {
                    map.apply(base.quantile(u)?)
                } else {
                    map.apply(base.quantile(1.0 - u)?)
                }
            }
            Distribution::ProportionalHazards { base, power } => {
                // S_base = (1 - u)^(1/power)
                let v = -((-u).ln_1p() / power).exp_m1();
                base.quantile(v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))?
            }
            Distribution::Numeric(n) => numeric_quantile(self, n, u)?,
        })
    }

    /// Interior points that mark where the probability mass sits; used to
    /// seed quadrature panels.
    pub fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        let mut v: Vec<f64> = match self {
            Distribution::Numeric(n) => n.breaks.clone(),
            _ => BREAK_PROBS
                .iter()
                .filter_map(|&p| self.quantile(p).ok())
                .collect(),
        };
        v.retain(|b| b.is_finite() && *b > lo && *b < hi);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Integrate `g` over `[lo, hi]` with panels seeded by this model's
    /// breakpoints (and any `extra` points).
    pub fn integrate_with<F: Fn(f64) -> f64>(
        &self,
        g: F,
        lo: f64,
        hi: f64,
        extra: &[f64],
        cfg: &QuadConfig,
    ) -> std::result::Result<Estimate, QuadError> {
        let mut pts: Vec<f64> = self
            .breakpoints()
            .into_iter()
            .chain(extra.iter().copied())
            .filter(|b| b.is_finite() && *b > lo && *b < hi)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.insert(0, lo);
        pts.push(hi);
        integrate_pieces(g, &pts, cfg)
    }

    /// Mean, analytic where known, otherwise `lo + ∫ S`. Infinite means are
    /// reported as errors.
    pub fn mean(&self, cfg: &QuadConfig) -> Result<f64> {
        let infinite = || Error::InfiniteMean(self.to_string());
        match self {
            Distribution::Uniform { a, b } => Ok(0.5 * (a + b)),
            Distribution::Exponential { rate } => Ok(1.0 / rate),
            Distribution::Weibull { shape, scale } => Ok(scale * gamma(1.0 + 1.0 / shape)),
            Distribution::Pareto { shape, scale } => {
                if *shape > 1.0 {
                    Ok(shape * scale / (shape - 1.0))
                } else {
                    Err(infinite())
                }
            }
            Distribution::InvertedExponential { .. } => Err(infinite()),
            Distribution::Gumbel2 { shape, scale } => {
                if *shape > 1.0 {
                    Ok(scale.powf(1.0 / shape) * gamma(1.0 - 1.0 / shape))
                } else {
                    Err(infinite())
                }
            }
            Distribution::TriangularUp => Ok(2.0 / 3.0),
            Distribution::TriangularDown => Ok(1.0 / 3.0),
            _ => {
                let (lo, hi) = self.support();
                if lo < 0.0 {
                    let body = self
                        .integrate_with(|x| x * self.density(x), lo, hi, &[], cfg)
                        .map_err(|_| infinite())?;
                    return Ok(body.value);
                }
                let tail = self
                    .integrate_with(|x| self.survival(x), lo, hi, &[], cfg)
                    .map_err(|_| infinite())?;
                Ok(lo + tail.value)
            }
        }
    }

    /// `n` inverse-CDF draws from a ChaCha8 stream seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng).map(|values| {
            Sample::from_parts(
                values,
                SampleSource::Generated {
                    model: self.to_string(),
                    seed,
                    n,
                },
            )
        })?
    }

    /// Raw draws (unsorted) from a caller-supplied generator.
    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::domain("sample size must be at least 1"));
        }
        (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.quantile(u)
            })
            .collect()
    }

    /// `log f(x)`, evaluated without forming `f` for the parametric tails so
    /// that it stays finite where the density itself underflows.
    pub fn log_density(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x.is_nan() || x < lo || x > hi {
            return f64::NEG_INFINITY;
        }
        match self {
            Distribution::Exponential { rate } => rate.ln() - rate * x,
            Distribution::InvertedExponential { lambda } if x > 0.0 => {
                let lx = lambda * x;
                -1.0 / lx - lx.ln() - x.ln()
            }
            Distribution::Weibull { shape, scale } if x > 0.0 => {
                let z = x / scale;
                (shape / scale).ln() + (shape - 1.0) * z.ln() - z.powf(*shape)
            }
            Distribution::Pareto { shape, scale } => {
                (shape / scale).ln() + (shape + 1.0) * (scale / x).ln()
            }
            Distribution::Gumbel2 { shape, scale } if x > 0.0 => {
                (shape * scale).ln() - (shape + 1.0) * x.ln() - scale * x.powf(-shape)
            }
            Distribution::Transformed { base, map } => {
                let u = map.inverse(x);
                base.log_density(u) - map.derivative(u).abs().ln()
            }
            Distribution::ProportionalHazards { base, power } => {
                power.ln() + (power - 1.0) * base.log_survival(x) + base.log_density(x)
            }
            _ => self.density(x).ln(),
        }
    }

    /// `log S(x)`, analytic for the parametric families.
    pub fn log_survival(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return f64::NEG_INFINITY;
        }
        match self {
            Distribution::Exponential { rate } => -rate * x,
            Distribution::Weibull { shape, scale } => -(x / scale).powf(*shape),
            Distribution::Pareto { shape, scale } => shape * (scale / x).ln(),
            Distribution::InvertedExponential { lambda } => (-(-1.0 / (lambda * x)).exp_m1()).ln(),
            Distribution::Gumbel2 { shape, scale } => (-(-scale * x.powf(-shape)).exp_m1()).ln(),
            Distribution::Transformed { base, map } if map.is_increasing() => {
                base.log_survival(map.inverse(x))
            }
            Distribution::ProportionalHazards { base, power } => power * base.log_survival(x),
            _ => self.survival(x).ln(),
        }
    }

    /// `Σ log f(x_i)`; `-inf` when any observation is outside the support.
    pub fn log_likelihood(&self, s: &Sample) -> f64 {
        s.values()
            .iter()
            .map(|&x| {
                let f = self.density(x);
                if f > 0.0 {
                    f.ln()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .sum()
    }
}

fn numeric_quantile(d: &Distribution, n: &NumericDensity, u: f64) -> Result<f64> {
    let mut lo = n.lo;
    let mut hi = n.hi;
    if !lo.is_finite() || !hi.is_finite() {
        // Bracket from the breakpoints outward.
        let anchor = n.breaks.first().copied().unwrap_or(0.0);
        let mut step = n
            .breaks
            .last()
            .map(|b| (b - anchor).abs())
            .unwrap_or(1.0)
            .max(1.0);
        if !lo.is_finite() {
            lo = anchor - step;
            while d.cdf(lo) > u {
                step *= 2.0;
                lo = anchor - step;
            }
        }
        if !hi.is_finite() {
            let start = n.breaks.last().copied().unwrap_or(anchor.max(lo));
            let mut step = step;
            hi = start + step;
            while d.cdf(hi) < u {
                step *= 2.0;
                hi = start + step;
                if !hi.is_finite() {
                    return Err(Error::NonConvergence("quantile bracket".into()));
                }
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let c = d.cdf(mid);
        if c.is_nan() {
            return Err(Error::NonConvergence(format!("cdf of {} at {mid}", n.label)));
        }
        if (c - u).abs() <= 1e-10 || hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(1e-300) {
            return Ok(mid);
        }
        if c < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Uniform { a, b } => write!(f, "uniform:a={a},b={b}"),
            Distribution::Exponential { rate } => write!(f, "exp:lambda={rate}"),
            Distribution::InvertedExponential { lambda } => write!(f, "invexp:lambda={lambda}"),
            Distribution::Weibull { shape, scale } => {
                write!(f, "weibull:delta={shape},theta={scale}")
            }
            Distribution::Pareto { shape, scale } => write!(f, "pareto1:c={shape},gamma={scale}"),
            Distribution::Gumbel2 { shape, scale } => {
                write!(f, "gumbel2:alpha={shape},lambda={scale}")
            }
            Distribution::TriangularUp => write!(f, "tri-up"),
            Distribution::TriangularDown => write!(f, "tri-down"),
            Distribution::Transformed { base, map } => match (base.as_ref(), map) {
                (
                    Distribution::Pareto { shape, scale },
                    MonotoneMap::Affine { a, b },
                ) if *scale == 1.0 && *a == 1.0 && *b == -1.0 => write!(f, "lomax:c={shape}"),
                _ => write!(f, "{map}({base})"),
            },
            Distribution::ProportionalHazards { base, power } => {
                write!(f, "ph({base},beta={power})")
            }
            Distribution::Numeric(n) => write!(f, "numeric({})", n.label),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    /// `<id>:<key>=<val>[,<key>=<val>...]`, e.g. `exp:lambda=0.5`,
    /// `pareto1:c=2,gamma=1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (id, rest) = s.split_once(':').unwrap_or((s, ""));
        let params = parse_params(rest)?;
        let allowed: &[&str] = match id {
            "uniform" | "unif" => &["a", "b"],
            "exp" | "exponential" => &["lambda"],
            "invexp" => &["lambda"],
            "weibull" => &["delta", "theta"],
            "pareto1" | "pareto" => &["c", "gamma"],
            "lomax" => &["c"],
            "gumbel2" => &["alpha", "lambda"],
            "tri-up" | "tri-down" => &[],
            other => return Err(Error::Parse(format!("unknown model `{other}`"))),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::Parse(format!("model `{id}` has no parameter `{k}`")));
        }
        let get = |k: &str, default: Option<f64>| -> Result<f64> {
            params
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| *v)
                .or(default)
                .ok_or_else(|| Error::Parse(format!("model `{s}` is missing `{k}`")))
        };
        match id {
            "uniform" | "unif" => Distribution::uniform(get("a", None)?, get("b", None)?),
            "exp" | "exponential" => Distribution::exponential(get("lambda", None)?),
            "invexp" => Distribution::inverted_exponential(get("lambda", None)?),
            "weibull" => Distribution::weibull(get("delta", None)?, get("theta", Some(1.0))?),
            "pareto1" | "pareto" => Distribution::pareto(get("c", None)?, get("gamma", Some(1.0))?),
            "lomax" => Distribution::lomax(get("c", None)?),
            "gumbel2" => Distribution::gumbel2(get("alpha", None)?, get("lambda", None)?),
            "tri-up" => Ok(Distribution::TriangularUp),
            "tri-down" => Ok(Distribution::TriangularDown),
            _ => unreachable!(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SampleSource {
    Fixture { name: String },
    Generated { model: String, seed: u64, n: usize },
    File { path: String },
    Inline,
}

/// Non-empty, sorted, finite, non-negative observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    source: SampleSource,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Sample::from_parts(values, SampleSource::Inline)
    }

    pub fn from_parts(mut values: Vec<f64>, source: SampleSource) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::domain(format!(
                "sample values must be finite and non-negative, got {bad}"
            )));
        }
        values.sort_by(f64::total_cmp);
        Ok(Sample { values, source })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> &SampleSource {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn density_examples() {
        assert_eq!(Distribution::exponential(2.0).unwrap().density(0.0), 2.0);
        assert!(close(Distribution::uniform(0.0, 10.0).unwrap().density(5.0), 0.1, 1e-15));
        let p = Distribution::pareto(2.0, 1.0).unwrap();
        assert!(close(p.density(2.0), 0.25, 1e-15));
        assert_eq!(p.density(0.5), 0.0);
    }

    #[test]
    fn survival_examples() {
        assert_eq!(Distribution::exponential(1.0).unwrap().survival(0.0), 1.0);
        assert!(close(Distribution::pareto(2.0, 1.0).unwrap().survival(2.0), 0.25, 1e-15));
        assert_eq!(Distribution::uniform(0.0, 10.0).unwrap().survival(10.0), 0.0);
    }

    #[test]
    fn hazard_examples() {
        assert!(close(Distribution::exponential(2.0).unwrap().hazard(1.0).unwrap(), 2.0, 1e-12));
        assert!(close(Distribution::uniform(0.0, 1.0).unwrap().hazard(0.5).unwrap(), 2.0, 1e-12));
        assert!(close(Distribution::weibull(1.0, 1.0).unwrap().hazard(3.0).unwrap(), 1.0, 1e-12));
        assert!(Distribution::uniform(0.0, 1.0).unwrap().hazard(1.0).is_err());
    }

    #[test]
    fn quantile_examples() {
        let e = Distribution::exponential(1.0).unwrap();
        assert!(close(e.quantile(0.5).unwrap(), std::f64::consts::LN_2, 1e-15));
        assert!(close(Distribution::uniform(0.0, 10.0).unwrap().quantile(0.25).unwrap(), 2.5, 1e-15));
        assert!(close(Distribution::pareto(2.0, 1.0).unwrap().quantile(0.75).unwrap(), 2.0, 1e-12));
        assert!(e.quantile(0.0).is_err());
        assert!(e.quantile(1.0).is_err());
    }

    #[test]
    fn log_likelihood_examples() {
        let e = Distribution::exponential(1.0).unwrap();
        assert!(close(e.log_likelihood(&Sample::new(vec![1.0]).unwrap()), -1.0, 1e-15));
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        assert_eq!(u.log_likelihood(&Sample::new(vec![0.2, 0.9]).unwrap()), 0.0);
        assert_eq!(
            u.log_likelihood(&Sample::new(vec![0.2, 1.5]).unwrap()),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn sampling_is_deterministic() {
        let e = Distribution::exponential(1.0).unwrap();
        assert_eq!(e.sample(5, 42).unwrap(), e.sample(5, 42).unwrap());
        assert_ne!(e.sample(5, 42).unwrap(), e.sample(5, 43).unwrap());
        assert!(e.sample(0, 1).is_err());
    }

    #[test]
    fn law_of_large_numbers() {
        let u = Distribution::uniform(0.0, 1.0).unwrap().sample(100_000, 7).unwrap();
        assert!(close(u.mean(), 0.5, 0.01));
        let e = Distribution::exponential(0.5).unwrap().sample(100_000, 7).unwrap();
        assert!(close(e.mean(), 2.0, 0.05));
    }

    #[test]
    fn lomax_is_shifted_pareto() {
        let l = Distribution::lomax(2.0).unwrap();
        assert_eq!(l.support(), (0.0, f64::INFINITY));
        // f(x) = c (1 + x)^-(c+1)
        assert!(close(l.density(1.0), 2.0 / 8.0, 1e-15));
        assert!(close(l.survival(1.0), 0.25, 1e-15));
        assert_eq!(l.to_string(), "lomax:c=2");
    }

    #[test]
    fn decreasing_transform() {
        // 1/X for X ~ exp(1): P(1/X <= y) = P(X >= 1/y) = exp(-1/y)
        let e = Distribution::exponential(1.0).unwrap();
        let r = e.transformed(MonotoneMap::Reciprocal).unwrap();
        for y in [0.3, 1.0, 4.0] {
            assert!(close(r.cdf(y), (-1.0 / y).exp(), 1e-14));
            assert!(close(r.density(y), (-1.0 / y).exp() / (y * y), 1e-14));
        }
        let q = r.quantile(0.3).unwrap();
        assert!(close(r.cdf(q), 0.3, 1e-12));
    }

    #[test]
    fn proportional_hazards_closure() {
        let e = Distribution::exponential(1.5).unwrap();
        match e.proportional_hazards(2.0).unwrap() {
            Distribution::Exponential { rate } => assert!(close(rate, 3.0, 1e-15)),
            other => panic!("expected exponential, got {other}"),
        }
        let g = Distribution::gumbel2(2.0, 1.0).unwrap();
        let p = g.proportional_hazards(1.7).unwrap();
        for x in [0.5, 1.0, 2.5] {
            let lhs = p.hazard(x).unwrap();
            let rhs = 1.7 * g.hazard(x).unwrap();
            assert!(close(lhs, rhs, 1e-10 * rhs.max(1.0)), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn numeric_matches_analytic() {
        let n = Distribution::numeric(
            "2e^{-2x} unnormalised",
            |x| 3.0 * (-2.0 * x).exp(),
            0.0,
            f64::INFINITY,
            vec![0.5, 2.0],
        )
        .unwrap();
        let e = Distribution::exponential(2.0).unwrap();
        for x in [0.1, 0.7, 3.0] {
            assert!(close(n.density(x), e.density(x), 1e-10));
            assert!(close(n.cdf(x), e.cdf(x), 1e-10));
        }
        let q = n.quantile(0.9).unwrap();
        assert!(close(q, e.quantile(0.9).unwrap(), 1e-8));
    }

    #[test]
    fn parse_models() {
        let d: Distribution = "exp:lambda=0.5".parse().unwrap();
        assert!(matches!(d, Distribution::Exponential { rate } if rate == 0.5));
        let p: Distribution = "pareto1:c=2,gamma=1".parse().unwrap();
        assert!(matches!(p, Distribution::Pareto { shape, scale } if shape == 2.0 && scale == 1.0));
        assert!("exp:rate=1".parse::<Distribution>().is_err());
        assert!("nope:x=1".parse::<Distribution>().is_err());
        assert!("exp:lambda=-1".parse::<Distribution>().is_err());
        assert!("uniform:a=2,b=1".parse::<Distribution>().is_err());
        for s in [
            "uniform:a=0,b=10",
            "invexp:lambda=2",
            "weibull:delta=2,theta=1",
            "gumbel2:alpha=4,lambda=6",
            "lomax:c=2",
            "tri-up",
        ] {
            let d: Distribution = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
    }

    #[test]
    fn mean_and_infinite_mean() {
        let c = QuadConfig::default();
        assert!(close(Distribution::exponential(4.0).unwrap().mean(&c).unwrap(), 0.25, 1e-15));
        assert!(matches!(
            Distribution::pareto(1.0, 1.0).unwrap().mean(&c),
            Err(Error::InfiniteMean(_))
        ));
        let lomax3 = Distribution::lomax(3.0).unwrap();
        assert!(close(lomax3.mean(&c).unwrap(), 0.5, 1e-9));
    }

    #[test]
    fn sample_invariants() {
        let s = Sample::new(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
        assert!(matches!(Sample::new(vec![]), Err(Error::EmptySample)));
        assert!(Sample::new(vec![1.0, -0.1]).is_err());
        assert!(Sample::new(vec![f64::NAN]).is_err());
    }
}
