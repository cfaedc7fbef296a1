//! Weighted relative information generating function
//! `R^w_b(X, Y) = ∫ w f^b g^(1-b)` and the divergences it generates.

use statrs::function::gamma::gamma;

use crate::dist::{Distribution, MonotoneMap};
use crate::error::{Error, Result};
use crate::igf::{check_public_beta, ClosedForm, Evaluation, Method};
use crate::integrate::QuadConfig;
use crate::weights::WeightFn;

const SUPPORT_PROBES: usize = 64;

#[derive(Debug, Clone)]
pub struct RigfQuery {
    pub f: Distribution,
    pub g: Distribution,
    pub weight: WeightFn,
    pub beta: f64,
    pub quad: QuadConfig,
}

impl RigfQuery {
    pub fn new(f: Distribution, g: Distribution, weight: WeightFn, beta: f64) -> Result<Self> {
        check_public_beta(beta)?;
        Ok(RigfQuery {
            f,
            g,
            weight,
            beta,
            quad: QuadConfig::default(),
        })
    }

    pub fn with_quad(mut self, quad: QuadConfig) -> Self {
        self.quad = quad;
        self
    }
}

/// `f^b g^(1-b)` from log densities, with `0^b = 0` for `b > 0` and
/// `0^(1-b) = 0` for `b < 1`.
#[inline]
pub(crate) fn mix_pow(lf: f64, lg: f64, beta: f64) -> f64 {
    if beta == 1.0 {
        return lf.exp();
    }
    if beta == 0.0 {
        return lg.exp();
    }
    if lf > f64::NEG_INFINITY && lg > f64::NEG_INFINITY {
        return (beta * lf + (1.0 - beta) * lg).exp();
    }
    if (lf == f64::NEG_INFINITY && beta > 0.0) || (lg == f64::NEG_INFINITY && beta < 1.0) {
        0.0
    } else {
        f64::INFINITY
    }
}

fn probe_points(d: &Distribution) -> Vec<f64> {
    match d {
        Distribution::Numeric(_) => {
            let b = d.breakpoints();
            let (lo, hi) = match (b.first(), b.last()) {
                (Some(&l), Some(&h)) if h > l => (l, h),
                _ => {
                    let (l, h) = d.support();
                    (l, h)
                }
            };
            if !(lo.is_finite() && hi.is_finite()) {
                return b;
            }
            (0..SUPPORT_PROBES)
                .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / SUPPORT_PROBES as f64)
                .collect()
        }
        _ => (0..SUPPORT_PROBES)
            .filter_map(|i| d.quantile((i as f64 + 0.5) / SUPPORT_PROBES as f64).ok())
            .collect(),
    }
}

/// `g > 0` wherever `f` carries mass, probed at 64 quantiles of `f`.
pub fn check_support(f: &Distribution, g: &Distribution) -> Result<()> {
    for x in probe_points(f) {
        if f.density(x) > 0.0 && !(g.density(x) > 0.0) {
            return Err(Error::SupportMismatch(format!(
                "{g} vanishes at x = {x} where {f} has positive density"
            )));
        }
    }
    Ok(())
}

/// Integration range for `f^b g^(1-b)`: the support of `f` for `b >= 1`,
/// of `g` for `b <= 0`, and the overlap in between.
pub(crate) fn rigf_range(f: &Distribution, g: &Distribution, beta: f64) -> Result<(f64, f64)> {
    let (fl, fh) = f.support();
    let (gl, gh) = g.support();
    let (lo, hi) = if beta >= 1.0 {
        check_support(f, g)?;
        (fl, fh)
    } else if beta <= 0.0 {
        check_support(g, f)?;
        (gl, gh)
    } else {
        (fl.max(gl), fh.min(gh))
    };
    if !(lo < hi) {
        return Err(Error::SupportMismatch(format!("supports of {f} and {g} do not overlap")));
    }
    Ok((lo, hi))
}

pub fn gwrigf(q: &RigfQuery) -> Result<f64> {
    check_public_beta(q.beta)?;
    gwrigf_ext(&q.f, &q.g, &q.weight, q.beta, &q.quad)
}

/// `R^w_b(f, g)` for any real `b`.
pub fn gwrigf_ext(f: &Distribution, g: &Distribution, w: &WeightFn, beta: f64, cfg: &QuadConfig) -> Result<f64> {
    let (lo, hi) = rigf_range(f, g, beta)?;
    f.integrate_with(
        |x| {
            let m = mix_pow(f.log_density(x), g.log_density(x), beta);
            if m > 0.0 {
                w.value(x) * m
            } else {
                m
            }
        },
        lo,
        hi,
        &g.breakpoints(),
        cfg,
    )
    .map(|e| e.value)
    .map_err(|e| Error::divergent(format!("R^{w}_{beta}({f}, {g})"), e))
}

pub fn evaluate_rigf(q: &RigfQuery, method: Method) -> Result<Evaluation> {
    check_public_beta(q.beta)?;
    Evaluation::assemble(
        method,
        || gwrigf_closed(&q.f, &q.g, &q.weight, q.beta),
        || gwrigf(q),
    )
}

fn power_of(w: &WeightFn) -> Option<f64> {
    match w {
        WeightFn::One => Some(0.0),
        WeightFn::Identity => Some(1.0),
        WeightFn::Power { m } => Some(*m),
        _ => None,
    }
}

/// Closed forms for the worked pairs: exponential and unit-scale Pareto
/// pairs with `w = x^m`, and the square-root and reciprocal images of an
/// exponential pair.
pub fn gwrigf_closed(f: &Distribution, g: &Distribution, w: &WeightFn, beta: f64) -> Result<ClosedForm> {
    let b = beta;
    let none = || Error::NoClosedForm(format!("R^{w}_beta({f}, {g})"));
    let cf = match (f, g) {
        (Distribution::Exponential { rate: l1 }, Distribution::Exponential { rate: l2 }) => {
            let m = power_of(w).ok_or_else(none)?;
            let c = b * l1 + (1.0 - b) * l2;
            if !(c > 0.0) || m <= -1.0 {
                return Err(Error::domain("exponential pair: b l1 + (1 - b) l2 must be positive"));
            }
            ClosedForm::exact(
                "exp-pair/pow",
                gamma(m + 1.0) * l1.powf(b) * l2.powf(1.0 - b) / c.powf(m + 1.0),
            )
        }
        (
            Distribution::Pareto { shape: a1, scale: s1 },
            Distribution::Pareto { shape: a2, scale: s2 },
        ) if *s1 == 1.0 && *s2 == 1.0 => {
            let m = power_of(w).ok_or_else(none)?;
            let d = (a1 + 1.0) * b + (a2 + 1.0) * (1.0 - b) - 1.0 - m;
            if !(d > 0.0) {
                return Err(Error::domain(
                    "pareto pair: m - (a1+1)b - (a2+1)(1-b) + 1 must be negative",
                ));
            }
            ClosedForm::exact("pareto-pair/pow", a1.powf(b) * a2.powf(1.0 - b) / d)
        }
        (
            Distribution::Transformed { base: bf, map: mf },
            Distribution::Transformed { base: bg, map: mg },
        ) if mf == mg => match (&**bf, &**bg, mf, w) {
            (
                Distribution::Exponential { rate: l1 },
                Distribution::Exponential { rate: l2 },
                MonotoneMap::Sqrt,
                WeightFn::Identity,
            ) => {
                let c = pair_rate(*l1, *l2, b)?;
                ClosedForm::exact(
                    "sqrt-exp-pair/x",
                    0.5 * std::f64::consts::PI.sqrt() * l1.powf(b) * l2.powf(1.0 - b) / c.powf(1.5),
                )
            }
            (
                Distribution::Exponential { rate: l1 },
                Distribution::Exponential { rate: l2 },
                MonotoneMap::Reciprocal,
                WeightFn::Reciprocal,
            ) => {
                let c = pair_rate(*l1, *l2, b)?;
                ClosedForm::exact("inv-exp-pair/invx", l1.powf(b) * l2.powf(1.0 - b) / (c * c))
            }
            _ => return Err(none()),
        },
        _ => return Err(none()),
    };
    Ok(cf)
}

fn pair_rate(l1: f64, l2: f64, b: f64) -> Result<f64> {
    let c = b * l1 + (1.0 - b) * l2;
    if c > 0.0 {
        Ok(c)
    } else {
        Err(Error::domain("exponential pair: b l1 + (1 - b) l2 must be positive"))
    }
}

/// `∂^k/∂b^k R^w_b = ∫ w f^b g^(1-b) (log f/g)^k`.
pub fn gwrigf_derivative(q: &RigfQuery, k: u32) -> Result<f64> {
    check_public_beta(q.beta)?;
    gwrigf_derivative_ext(&q.f, &q.g, &q.weight, q.beta, k, &q.quad)
}

pub fn gwrigf_derivative_ext(
    f: &Distribution,
    g: &Distribution,
    w: &WeightFn,
    beta: f64,
    k: u32,
    cfg: &QuadConfig,
) -> Result<f64> {
    let (lo, hi) = rigf_range(f, g, beta)?;
    let k = k as i32;
    f.integrate_with(
        |x| {
            let (lf, lg) = (f.log_density(x), g.log_density(x));
            if lf > f64::NEG_INFINITY && lg > f64::NEG_INFINITY {
                w.value(x) * mix_pow(lf, lg, beta) * (lf - lg).powi(k)
            } else {
                0.0
            }
        },
        lo,
        hi,
        &g.breakpoints(),
        cfg,
    )
    .map(|e| e.value)
    .map_err(|e| Error::divergent(format!("d^{k} R^{w}_{beta}({f}, {g})"), e))
}

/// `∫ w f log(f/g)`.
pub fn weighted_kl(f: &Distribution, g: &Distribution, w: &WeightFn, cfg: &QuadConfig) -> Result<f64> {
    gwrigf_derivative_ext(f, g, w, 1.0, 1, cfg)
}

pub fn weighted_j_divergence(f: &Distribution, g: &Distribution, w: &WeightFn, cfg: &QuadConfig) -> Result<f64> {
    Ok(weighted_kl(f, g, w, cfg)? + weighted_kl(g, f, w, cfg)?)
}

/// `R^w_b(ψ(X), ψ(Y))`, computed on the original scale as
/// `∫ w(ψ(x)) f^b g^(1-b) dx`.
pub fn gwrigf_transformed(
    f: &Distribution,
    g: &Distribution,
    w: &WeightFn,
    map: MonotoneMap,
    beta: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    let (lo, hi) = rigf_range(f, g, beta)?;
    map.map_interval(lo, hi)?;
    f.integrate_with(
        |x| {
            let m = mix_pow(f.log_density(x), g.log_density(x), beta);
            if m > 0.0 {
                w.value(map.apply(x)) * m
            } else {
                m
            }
        },
        lo,
        hi,
        &g.breakpoints(),
        cfg,
    )
    .map(|e| e.value)
    .map_err(|e| Error::divergent(format!("R^{w}_{beta}({map}({f}), {map}({g}))"), e))
}

/// Weighted `b`-cross informational energy `∫ w sqrt(f^b g^b)`.
pub fn cross_informational_energy(
    f: &Distribution,
    g: &Distribution,
    w: &WeightFn,
    beta: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    let (lo, hi) = rigf_range(f, g, 0.5)?;
    f.integrate_with(
        |x| {
            let (lf, lg) = (f.log_density(x), g.log_density(x));
            if lf > f64::NEG_INFINITY && lg > f64::NEG_INFINITY {
                w.value(x) * (0.5 * beta * (lf + lg)).exp()
            } else {
                0.0
            }
        },
        lo,
        hi,
        &g.breakpoints(),
        cfg,
    )
    .map(|e| e.value)
    .map_err(|e| Error::divergent(format!("CI^{w}_{beta}({f}, {g})"), e))
}
