//! Escort, generalized-escort, (r, γ)-mixture, equilibrium and
//! proportional-hazards constructions, and numeric checks of the identities
//! that tie their generating functions back to the base laws.

use serde::Serialize;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::igf::gwigf_ext;
use crate::integrate::QuadConfig;
use crate::rigf::{cross_informational_energy, gwrigf_ext, mix_pow, rigf_range};
use crate::weights::WeightFn;

/// Default tolerance on the scaled gap of an [`IdentityReport`].
pub const IDENTITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(1, |rhs|)`.
    pub gap: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_satisfied: Option<bool>,
}

impl IdentityReport {
    pub fn new(lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let gap = (lhs - rhs).abs() / rhs.abs().max(1.0);
        IdentityReport {
            lhs,
            rhs,
            gap,
            tolerance,
            passed: gap <= tolerance,
            bound: None,
            bound_satisfied: None,
        }
    }

    pub fn with_tolerance(self, tolerance: f64) -> Self {
        IdentityReport {
            tolerance,
            passed: self.gap <= tolerance,
            ..self
        }
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain(format!("{name} must be a positive real, got {v}")))
    }
}

fn support_breaks(ds: &[&Distribution]) -> Vec<f64> {
    let mut v = Vec::new();
    for d in ds {
        let (lo, hi) = d.support();
        v.push(lo);
        v.push(hi);
        v.extend(d.breakpoints());
    }
    v
}

/// Escort of order `alpha`: density `f^alpha / ∫ f^alpha`. Exponential and
/// uniform laws map to themselves in closed form.
pub fn escort(d: &Distribution, alpha: f64) -> Result<Distribution> {
    positive("escort order", alpha)?;
    match d {
        _ if alpha == 1.0 => Ok(d.clone()),
        Distribution::Exponential { rate } => Distribution::exponential(alpha * rate),
        Distribution::Uniform { .. } => Ok(d.clone()),
        _ => escort_numeric(d, alpha),
    }
}

/// Escort built by quadrature even where a closed form exists.
pub fn escort_numeric(d: &Distribution, alpha: f64) -> Result<Distribution> {
    positive("escort order", alpha)?;
    let (lo, hi) = d.support();
    let base = d.clone();
    Distribution::numeric(
        format!("escort({d}, {alpha})"),
        move |x| {
            let l = base.log_density(x);
            if l > f64::NEG_INFINITY {
                (alpha * l).exp()
            } else {
                0.0
            }
        },
        lo,
        hi,
        support_breaks(&[d]),
    )
}

/// Generalized escort `f^alpha g^(1-alpha) / R_alpha(f, g)`.
pub fn generalized_escort(f: &Distribution, g: &Distribution, alpha: f64) -> Result<Distribution> {
    positive("generalized escort order", alpha)?;
    if alpha == 1.0 {
        return Ok(f.clone());
    }
    if let (Distribution::Exponential { rate: l1 }, Distribution::Exponential { rate: l2 }) = (f, g) {
        let c = alpha * l1 + (1.0 - alpha) * l2;
        if c > 0.0 {
            return Distribution::exponential(c);
        }
        return Err(Error::divergent(
            format!("normaliser of generalized escort({f}, {g}, {alpha})"),
            crate::integrate::QuadError::NonFinite { x: f64::INFINITY, value: f64::INFINITY },
        ));
    }
    generalized_escort_numeric(f, g, alpha)
}

pub fn generalized_escort_numeric(f: &Distribution, g: &Distribution, alpha: f64) -> Result<Distribution> {
    positive("generalized escort order", alpha)?;
    let (lo, hi) = rigf_range(f, g, alpha)?;
    let (fc, gc) = (f.clone(), g.clone());
    Distribution::numeric(
        format!("gen-escort({f}, {g}, {alpha})"),
        move |x| mix_pow(fc.log_density(x), gc.log_density(x), alpha),
        lo,
        hi,
        support_breaks(&[f, g]),
    )
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn unit_interval(name: &str, r: f64) -> Result<f64> {
    if r > 0.0 && r < 1.0 {
        Ok(r)
    } else {
        Err(Error::domain(format!("{name} must lie in (0, 1), got {r}")))
    }
}

/// (r, γ)-mixture: density proportional to `[r f1^γ + (1-r) f2^γ]^(1/γ)`.
pub fn mixture_r_gamma(f1: &Distribution, f2: &Distribution, r: f64, gamma: f64) -> Result<Distribution> {
    unit_interval("mixing weight r", r)?;
    positive("mixture exponent", gamma)?;
    let (l1, h1) = f1.support();
    let (l2, h2) = f2.support();
    let (a, b) = (f1.clone(), f2.clone());
    let (lr, lr1) = (r.ln(), (1.0 - r).ln());
    Distribution::numeric(
        format!("mixture({f1}, {f2}, r={r}, gamma={gamma})"),
        move |x| {
            let s = log_add_exp(lr + gamma * a.log_density(x), lr1 + gamma * b.log_density(x));
            (s / gamma).exp()
        },
        l1.min(l2),
        h1.max(h2),
        support_breaks(&[f1, f2]),
    )
}

/// Mixture of the order-γ escorts of `f1` and `f2` with weight
/// `Γ = r I_γ(f1) / (r I_γ(f1) + (1-r) I_γ(f2))`; returns the density and Γ.
pub fn escort_mixture(
    f1: &Distribution,
    f2: &Distribution,
    r: f64,
    gamma: f64,
    cfg: &QuadConfig,
) -> Result<(Distribution, f64)> {
    unit_interval("mixing weight r", r)?;
    positive("mixture exponent", gamma)?;
    let i1 = gwigf_ext(f1, &WeightFn::One, gamma, cfg)?;
    let i2 = gwigf_ext(f2, &WeightFn::One, gamma, cfg)?;
    let big = r * i1 / (r * i1 + (1.0 - r) * i2);
    let (l1, h1) = f1.support();
    let (l2, h2) = f2.support();
    let (a, b) = (f1.clone(), f2.clone());
    let (w1, w2) = ((big / i1).ln(), ((1.0 - big) / i2).ln());
    let d = Distribution::numeric(
        format!("escort-mixture({f1}, {f2}, Gamma={big}, gamma={gamma})"),
        move |x| log_add_exp(w1 + gamma * a.log_density(x), w2 + gamma * b.log_density(x)).exp(),
        l1.min(l2),
        h1.max(h2),
        support_breaks(&[f1, f2]),
    )?;
    Ok((d, big))
}

/// Equilibrium law with density `S(x) / μ` on `[0, hi]`; needs a
/// non-negative support and a finite mean.
pub fn equilibrium(d: &Distribution) -> Result<Distribution> {
    if let Distribution::Exponential { .. } = d {
        return Ok(d.clone());
    }
    equilibrium_numeric(d)
}

pub fn equilibrium_numeric(d: &Distribution) -> Result<Distribution> {
    let (lo, hi) = d.support();
    if lo < 0.0 {
        return Err(Error::domain(format!("equilibrium needs a non-negative support, {d} starts at {lo}")));
    }
    d.mean(&QuadConfig::default())?;
    let base = d.clone();
    let mut breaks = support_breaks(&[d]);
    breaks.push(lo);
    Distribution::numeric(format!("equilibrium({d})"), move |x| base.survival(x), 0.0, hi, breaks)
}

/// Proportional-hazards law with survival `S^beta`.
pub fn ph(d: &Distribution, beta: f64) -> Result<Distribution> {
    d.proportional_hazards(beta)
}

/// `I^w_b(escort(d, a)) = I^w_{ab}(d) / I_a(d)^b`.
pub fn verify_escort_igf(d: &Distribution, w: &WeightFn, alpha: f64, beta: f64, cfg: &QuadConfig) -> Result<IdentityReport> {
    let esc = escort_numeric(d, alpha)?;
    let lhs = gwigf_ext(&esc, w, beta, cfg)?;
    let rhs = gwigf_ext(d, w, alpha * beta, cfg)? / gwigf_ext(d, &WeightFn::One, alpha, cfg)?.powf(beta);
    Ok(IdentityReport::new(lhs, rhs, IDENTITY_TOL))
}

/// `I^w_b(gen-escort(f, g, a)) =
/// I_b(f)^a I_b(g)^(1-a) R^w_a(escort(f, b), escort(g, b)) / R_a(f, g)^b`.
pub fn verify_gen_escort_igf(
    f: &Distribution,
    g: &Distribution,
    w: &WeightFn,
    alpha: f64,
    beta: f64,
    cfg: &QuadConfig,
) -> Result<IdentityReport> {
    let ge = generalized_escort_numeric(f, g, alpha)?;
    let lhs = gwigf_ext(&ge, w, beta, cfg)?;
    let one = WeightFn::One;
    let ibf = gwigf_ext(f, &one, beta, cfg)?;
    let ibg = gwigf_ext(g, &one, beta, cfg)?;
    let ra = gwrigf_ext(f, g, &one, alpha, cfg)?;
    let ef = escort_numeric(f, beta)?;
    let eg = escort_numeric(g, beta)?;
    let rw = gwrigf_ext(&ef, &eg, w, alpha, cfg)?;
    let rhs = ibf.powf(alpha) * ibg.powf(1.0 - alpha) * rw / ra.powf(beta);
    Ok(IdentityReport::new(lhs, rhs, IDENTITY_TOL))
}

/// `I^w_b(M(r, γ)) = I^w_{b/γ}(X_Γ) / I_{1/γ}(X_Γ)^b`, with `X_Γ` the
/// escort mixture of [`escort_mixture`].
pub fn verify_mixture_igf(
    f1: &Distribution,
    f2: &Distribution,
    r: f64,
    gamma: f64,
    w: &WeightFn,
    beta: f64,
    cfg: &QuadConfig,
) -> Result<IdentityReport> {
    let m = mixture_r_gamma(f1, f2, r, gamma)?;
    let lhs = gwigf_ext(&m, w, beta, cfg)?;
    let (xg, _) = escort_mixture(f1, f2, r, gamma, cfg)?;
    let rhs = gwigf_ext(&xg, w, beta / gamma, cfg)?
        / gwigf_ext(&xg, &WeightFn::One, 1.0 / gamma, cfg)?.powf(beta);
    Ok(IdentityReport::new(lhs, rhs, IDENTITY_TOL))
}

/// `R^w_b(M(r, γ), f_i) = R^w_b(escort(X_Γ, 1/γ), f_i)`.
#[allow(clippy::too_many_arguments)]
pub fn verify_mixture_rigf(
    f1: &Distribution,
    f2: &Distribution,
    r: f64,
    gamma: f64,
    w: &WeightFn,
    beta: f64,
    component: usize,
    cfg: &QuadConfig,
) -> Result<IdentityReport> {
    let fi = match component {
        1 => f1,
        2 => f2,
        other => return Err(Error::domain(format!("component must be 1 or 2, got {other}"))),
    };
    let m = mixture_r_gamma(f1, f2, r, gamma)?;
    let lhs = gwrigf_ext(&m, fi, w, beta, cfg)?;
    let (xg, _) = escort_mixture(f1, f2, r, gamma, cfg)?;
    let k = escort_numeric(&xg, 1.0 / gamma)?;
    let rhs = gwrigf_ext(&k, fi, w, beta, cfg)?;
    Ok(IdentityReport::new(lhs, rhs, IDENTITY_TOL))
}

/// `CI^w_b(escort(f, a), escort(g, a)) = CI^w_{ab}(f, g) / sqrt((I_a(f) I_a(g))^b)`,
/// together with the arithmetic-mean bound on the left side.
pub fn verify_cross_energy_escort(
    f: &Distribution,
    g: &Distribution,
    w: &WeightFn,
    alpha: f64,
    beta: f64,
    cfg: &QuadConfig,
) -> Result<IdentityReport> {
    let ef = escort_numeric(f, alpha)?;
    let eg = escort_numeric(g, alpha)?;
    let lhs = cross_informational_energy(&ef, &eg, w, beta, cfg)?;
    let one = WeightFn::One;
    let scale = (gwigf_ext(f, &one, alpha, cfg)? * gwigf_ext(g, &one, alpha, cfg)?)
        .powf(beta)
        .sqrt();
    let rhs = cross_informational_energy(f, g, w, alpha * beta, cfg)? / scale;
    let bound = (gwigf_ext(f, w, alpha * beta, cfg)? + gwigf_ext(g, w, alpha * beta, cfg)?) / (2.0 * scale);
    let mut rep = IdentityReport::new(lhs, rhs, IDENTITY_TOL);
    rep.bound = Some(bound);
    rep.bound_satisfied = Some(lhs <= bound + crate::igf::BOUND_SLACK * bound.abs().max(1.0));
    Ok(rep)
}
