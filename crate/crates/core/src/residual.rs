//! Residual-lifetime generating functions: `I^w_b(X; t)` for `X_t = [X | X > t]`,
//! the relative version, mean residual life and the identities linking them
//! to hazard rates, equilibrium laws and proportional-hazards models.

use serde::Serialize;

use crate::dist::{Distribution, MonotoneMap};
use crate::error::{Error, Result};
use crate::igf::{check_public_beta, ClosedForm, BOUND_SLACK};
use crate::integrate::QuadConfig;
use crate::rigf::rigf_range;
use crate::transforms::{equilibrium_numeric, IdentityReport};
use crate::weights::WeightFn;

/// Ages whose survival probability is below this are rejected.
pub const MIN_SURVIVAL: f64 = 1e-12;

/// Default tolerance for the residual identities.
pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ResidualQuery {
    pub dist: Distribution,
    pub weight: WeightFn,
    pub beta: f64,
    pub t: f64,
    pub quad: QuadConfig,
}

impl ResidualQuery {
    pub fn new(dist: Distribution, weight: WeightFn, beta: f64, t: f64) -> Result<Self> {
        check_public_beta(beta)?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("age t must be a finite non-negative real, got {t}")));
        }
        age(&dist, t)?;
        Ok(ResidualQuery {
            dist,
            weight,
            beta,
            t,
            quad: QuadConfig::default(),
        })
    }

    pub fn with_quad(mut self, quad: QuadConfig) -> Self {
        self.quad = quad;
        self
    }
}

/// Age clamped to the lower support endpoint, with its log-survival.
pub fn age(d: &Distribution, t: f64) -> Result<(f64, f64)> {
    if t.is_nan() {
        return Err(Error::domain("age t is NaN"));
    }
    let (lo, _) = d.support();
    let t = t.max(lo);
    let ls = d.log_survival(t);
    if !(ls > MIN_SURVIVAL.ln()) {
        return Err(Error::DeadAt { t });
    }
    Ok((t, ls))
}

pub fn residual_gwigf(q: &ResidualQuery) -> Result<f64> {
    check_public_beta(q.beta)?;
    residual_gwigf_ext(&q.dist, &q.weight, q.beta, q.t, &q.quad)
}

/// `∫_t w (f / S(t))^b` for any real `b`.
pub fn residual_gwigf_ext(d: &Distribution, w: &WeightFn, beta: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
    let (t, ls) = age(d, t)?;
    let (_, hi) = d.support();
    d.integrate_with(
        |x| {
            let lf = d.log_density(x);
            if lf > f64::NEG_INFINITY {
                w.value(x) * (beta * (lf - ls)).exp()
            } else {
                0.0
            }
        },
        t,
        hi,
        &[],
        cfg,
    )
    .map(|e| e.value)
    .map_err(|e| Error::divergent(format!("I^{w}_{beta}({d}; t={t})"), e))
}

/// Closed forms for `w = x` (and `w = 1` for the exponential law).
pub fn residual_gwigf_closed(d: &Distribution, w: &WeightFn, beta: f64, t: f64) -> Result<ClosedForm> {
    let b = beta;
    match (d, w) {
        (Distribution::Exponential { rate }, WeightFn::Identity) => {
            let lb = b * rate;
            Ok(ClosedForm::exact("exp/x", rate.powf(b) * (lb * t + 1.0) / (lb * lb)))
        }
        (Distribution::Exponential { rate }, WeightFn::One) => {
            Ok(ClosedForm::exact("exp/one", rate.powf(b - 1.0) / b))
        }
        (Distribution::Pareto { shape: a, scale: g }, WeightFn::Identity) => {
            let t = t.max(*g);
            let den = b * (a + 1.0) - 2.0;
            if !(den > 0.0) {
                return Err(Error::domain("pareto residual I^x needs b(a+1) > 2"));
            }
            let printed = (a * g.powf(*a) / (1.0 - (g / t).powf(*a))).powf(b) * t.powf(1.0 - a) / (a - 1.0);
            Ok(ClosedForm::flagged("pareto/x", a.powf(b) * t.powf(2.0 - b) / den, printed))
        }
        _ => Err(Error::NoClosedForm(format!("I^{w}_beta({d}; t)"))),
    }
}

/// The exponential residual form used by the plug-in estimator. The value
/// is `λ^b (bλt + 1) / (bλ)^2`; the variant with prefactor `b² λ^(b-2)` is
/// kept as `printed`.
pub fn exponential_plugin_form(lambda: f64, beta: f64, t: f64) -> ClosedForm {
    let lb = beta * lambda;
    ClosedForm::flagged(
        "exp/x plug-in",
        lambda.powf(beta) * (lb * t + 1.0) / (lb * lb),
        beta * beta * lambda.powf(beta - 2.0) * (lb * t + 1.0),
    )
}

/// `d/dt I^w_b(X; t) = -w(t) h(t)^b + b h(t) I^w_b(X; t)`.
pub fn residual_derivative_t(q: &ResidualQuery) -> Result<f64> {
    check_public_beta(q.beta)?;
    let i = residual_gwigf(q)?;
    let (t, _) = age(&q.dist, q.t)?;
    let h = q.dist.hazard(t)?;
    Ok(-q.weight.value(t) * h.powf(q.beta) + q.beta * h * i)
}

/// `-log S(x)`.
pub fn cumulative_hazard(d: &Distribution, x: f64) -> Result<f64> {
    let ls = d.log_survival(x);
    if ls == f64::NEG_INFINITY {
        return Err(Error::DeadAt { t: x });
    }
    Ok(-ls)
}

/// `E[w(X) f(X)^(b-1) H(X)] = (1/b) E_{X_b}[I^w_b(X; X_b)]`, the right side by
/// nested quadrature. Ages where the residual law is dead contribute 0.
pub fn verify_hazard_expectation(d: &Distribution, w: &WeightFn, beta: f64, cfg: &QuadConfig) -> Result<IdentityReport> {
    let (lo, hi) = d.support();
    let lhs = d
        .integrate_with(
            |x| {
                let lf = d.log_density(x);
                if lf == f64::NEG_INFINITY {
                    return 0.0;
                }
                w.value(x) * (beta * lf).exp() * -d.log_survival(x)
            },
            lo,
            hi,
            &[],
            cfg,
        )
        .map_err(|e| Error::divergent(format!("E[{w} f^(b-1) H] under {d}"), e))?
        .value;
    let inner = QuadConfig {
        rel_tol: (cfg.rel_tol * 0.1).max(1e-13),
        ..*cfg
    };
    let failure = std::cell::RefCell::new(None);
    let rhs = d
        .integrate_with(
            |t| {
                let lf = d.log_density(t);
                if lf == f64::NEG_INFINITY {
                    return 0.0;
                }
                match residual_gwigf_ext(d, w, beta, t, &inner) {
                    Ok(i) => (lf + (beta - 1.0) * d.log_survival(t)).exp() * i,
                    Err(Error::DeadAt { .. }) => 0.0,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            lo,
            hi,
            &[],
            cfg,
        )
        .map_err(|e| Error::divergent(format!("E over ph({d}, {beta}) of the residual GWIGF"), e));
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(IdentityReport::new(lhs, rhs?.value, RESIDUAL_TOL))
}

/// Mean residual life `∫_t S / S(t)`.
pub fn mrl(d: &Distribution, t: f64, cfg: &QuadConfig) -> Result<f64> {
    let (t, ls) = age(d, t)?;
    let (_, hi) = d.support();
    d.integrate_with(|x| (d.log_survival(x) - ls).exp(), t, hi, &[], cfg)
        .map(|e| e.value)
        .map_err(|_| Error::InfiniteMean(format!("{d} beyond t = {t}")))
}

/// `∫_t w S^b / S(t)^b`, the weighted mean residual life of the
/// proportional-hazards law with power `b`.
pub fn weighted_mrl(d: &Distribution, w: &WeightFn, t: f64, beta: f64, cfg: &QuadConfig) -> Result<f64> {
    let (t, ls) = age(d, t)?;
    let (_, hi) = d.support();
    d.integrate_with(|x| w.value(x) * (beta * (d.log_survival(x) - ls)).exp(), t, hi, &[], cfg)
        .map(|e| e.value)
        .map_err(|e| Error::divergent(format!("weighted MRL of ph({d}, {beta}) at t = {t}"), e))
}

/// `I^w_b(X_E; t) = M^w_{X_b}(t) / M_X(t)^b`.
pub fn verify_equilibrium_identity(
    d: &Distribution,
    w: &WeightFn,
    beta: f64,
    t: f64,
    cfg: &QuadConfig,
) -> Result<IdentityReport> {
    let eq = equilibrium_numeric(d)?;
    let lhs = residual_gwigf_ext(&eq, w, beta, t, cfg)?;
    let rhs = weighted_mrl(d, w, t, beta, cfg)? / mrl(d, t, cfg)?.powf(beta);
    Ok(IdentityReport::new(lhs, rhs, RESIDUAL_TOL))
}

/// `b^b I^w_b(X; t) = E[w(X_b) h_b(X_b)^(b-1) | X_b > t]` with `X_b` the
/// proportional-hazards law of power `b`.
pub fn verify_ph_hazard_expectation(
    d: &Distribution,
    w: &WeightFn,
    beta: f64,
    t: f64,
    cfg: &QuadConfig,
) -> Result<IdentityReport> {
    let lhs = beta.powf(beta) * residual_gwigf_ext(d, w, beta, t, cfg)?;
    let p = d.proportional_hazards(beta)?;
    let (t, lsp) = age(&p, t)?;
    let (_, hi) = p.support();
    let rhs = p
        .integrate_with(
            |x| {
                let lf = p.log_density(x);
                if lf == f64::NEG_INFINITY {
                    return 0.0;
                }
                let lh = lf - p.log_survival(x);
                w.value(x) * ((beta - 1.0) * lh + lf - lsp).exp()
            },
            t,
            hi,
            &[],
            cfg,
        )
        .map_err(|e| Error::divergent(format!("E[{w} h^(b-1) | X_b > {t}] under {p}"), e))?
        .value;
    Ok(IdentityReport::new(lhs, rhs, RESIDUAL_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Constant,
    NonMonotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualBoundReport {
    pub value: f64,
    pub bound: f64,
    pub direction: Monotonicity,
    /// `None` when the residual function is not monotone on the grid.
    pub satisfied: Option<bool>,
}

const MONO_GRID: usize = 21;
const MONO_TIE: f64 = 1e-10;

/// Direction of `t -> I^w_b(X; t)` on 21 ages spanning the 1% to 99%
/// quantiles of `X`.
pub fn residual_direction(d: &Distribution, w: &WeightFn, beta: f64, cfg: &QuadConfig) -> Result<Monotonicity> {
    let mut vals = Vec::with_capacity(MONO_GRID);
    for i in 0..MONO_GRID {
        let u = 0.01 + 0.98 * i as f64 / (MONO_GRID - 1) as f64;
        vals.push(residual_gwigf_ext(d, w, beta, d.quantile(u)?, cfg)?);
    }
    let (mut up, mut down) = (false, false);
    for p in vals.windows(2) {
        let diff = p[1] - p[0];
        let tie = MONO_TIE * p[0].abs().max(1.0);
        if diff > tie {
            up = true;
        } else if diff < -tie {
            down = true;
        }
    }
    Ok(match (up, down) {
        (true, false) => Monotonicity::Increasing,
        (false, true) => Monotonicity::Decreasing,
        (false, false) => Monotonicity::Constant,
        (true, true) => Monotonicity::NonMonotone,
    })
}

/// `I^w_b(X; t)` against `(1/b) w(t) h(t)^(b-1)`: a lower bound when the
/// residual function increases in `t`, an upper bound when it decreases.
pub fn residual_bound(q: &ResidualQuery) -> Result<ResidualBoundReport> {
    let value = residual_gwigf(q)?;
    let (t, _) = age(&q.dist, q.t)?;
    let bound = q.weight.value(t) * q.dist.hazard(t)?.powf(q.beta - 1.0) / q.beta;
    let direction = residual_direction(&q.dist, &q.weight, q.beta, &q.quad)?;
    let slack = BOUND_SLACK * bound.abs().max(1.0);
    let satisfied = match direction {
        Monotonicity::Increasing => Some(value >= bound - slack),
        Monotonicity::Decreasing => Some(value <= bound + slack),
        Monotonicity::Constant => Some((value - bound).abs() <= slack.max(MONO_TIE)),
        Monotonicity::NonMonotone => None,
    };
    Ok(ResidualBoundReport {
        value,
        bound,
        direction,
        satisfied,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualOrderingCell {
    pub beta: f64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualOrderingReport {
    pub premises_hold: bool,
    pub premise_failures: Vec<String>,
    pub cells: Vec<ResidualOrderingCell>,
    pub first_violation: Option<(f64, f64)>,
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|p| p[1] <= p[0] + 1e-10 * p[0].abs().max(1.0))
}

/// Premises: `Y <=_hr X` (hazard of `Y` dominates), one of the two laws
/// DFR, `w` decreasing. Conclusion: `I^w_b(X; t) <= I^w_b(Y; t)`.
pub fn residual_ordering_check(
    dx: &Distribution,
    dy: &Distribution,
    w: &WeightFn,
    betas: &[f64],
    ts: &[f64],
    cfg: &QuadConfig,
) -> Result<ResidualOrderingReport> {
    let mut xs = Vec::new();
    for i in 1..100 {
        let u = i as f64 / 100.0;
        xs.push(dx.quantile(u)?);
        xs.push(dy.quantile(u)?);
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut failures = Vec::new();
    let hx: Vec<f64> = xs.iter().map(|&x| dx.hazard(x)).collect::<Result<_>>()?;
    let hy: Vec<f64> = xs.iter().map(|&x| dy.hazard(x)).collect::<Result<_>>()?;
    if hx.iter().zip(&hy).any(|(a, b)| *b < a * (1.0 - 1e-10)) {
        failures.push("hazard of Y does not dominate the hazard of X".to_string());
    }
    if !non_increasing(&hx) && !non_increasing(&hy) {
        failures.push("neither law is DFR on the grid".to_string());
    }
    let wv: Vec<f64> = xs.iter().map(|&x| w.value(x)).collect();
    if !non_increasing(&wv) {
        failures.push(format!("{w} is not decreasing on the grid"));
    }
    let premises_hold = failures.is_empty();
    let mut cells = Vec::new();
    let mut first_violation = None;
    for &b in betas {
        check_public_beta(b)?;
        for &t in ts {
            let x = residual_gwigf_ext(dx, w, b, t, cfg)?;
            let y = residual_gwigf_ext(dy, w, b, t, cfg)?;
            let holds = x <= y + BOUND_SLACK * y.abs().max(1.0);
            if premises_hold && !holds && first_violation.is_none() {
                first_violation = Some((b, t));
            }
            cells.push(ResidualOrderingCell { beta: b, t, x, y, holds });
        }
    }
    Ok(ResidualOrderingReport {
        premises_hold,
        premise_failures: failures,
        cells,
        first_violation,
    })
}

fn residual_pair_range(f: &Distribution, g: &Distribution, beta: f64, t: f64) -> Result<(f64, f64, f64, f64)> {
    let (tf, lsf) = age(f, t)?;
    let (tg, lsg) = age(g, t)?;
    let (lo, hi) = rigf_range(f, g, beta)?;
    let lo = lo.max(tf).max(tg);
    if !(lo < hi) {
        return Err(Error::SupportMismatch(format!("no overlap of {f} and {g} beyond t = {t}")));
    }
    Ok((lo, hi, lsf, lsg))
}

/// `∫_t w (f/F(t))^b (g/G(t))^(1-b)` with `F`, `G` the survival functions.
pub fn residual_gwrigf(
    f: &Distribution,
    g: &Distribution,
    w: &WeightFn,
    beta: f64,
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    let (lo, hi, lsf, lsg) = residual_pair_range(f, g, beta, t)?;
    f.integrate_with(
        |x| {
            let m = crate::rigf::mix_pow(f.log_density(x) - lsf, g.log_density(x) - lsg, beta);
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
    .map_err(|e| Error::divergent(format!("R^{w}_{beta}({f}, {g}; t={t})"), e))
}

/// Closed forms with `w = x`: exponential pairs, and unit-scale Pareto
/// pairs (the latter with the printed denominator kept as `printed`).
pub fn residual_gwrigf_closed(f: &Distribution, g: &Distribution, w: &WeightFn, beta: f64, t: f64) -> Result<ClosedForm> {
    let b = beta;
    match (f, g, w) {
        (Distribution::Exponential { rate: l1 }, Distribution::Exponential { rate: l2 }, WeightFn::Identity) => {
            let c = b * l1 + (1.0 - b) * l2;
            if !(c > 0.0) {
                return Err(Error::domain("exponential pair: b l1 + (1 - b) l2 must be positive"));
            }
            let t = t.max(0.0);
            Ok(ClosedForm::exact(
                "exp-pair/x",
                l1.powf(b) * l2.powf(1.0 - b) * (t / c + 1.0 / (c * c)),
            ))
        }
        (
            Distribution::Pareto { shape: c, scale: s1 },
            Distribution::Pareto { shape: gm, scale: s2 },
            WeightFn::Identity,
        ) if *s1 == 1.0 && *s2 == 1.0 => {
            let den = b * c - b * gm + gm - 1.0;
            if !(den > 0.0) {
                return Err(Error::domain("pareto pair: b c - b g + g - 1 must be positive"));
            }
            let t = t.max(1.0);
            let num = c.powf(b) * gm.powf(1.0 - b) * t;
            Ok(ClosedForm::flagged("pareto-pair/x", num / den, num / (1.0 - gm + b * c - b * gm)))
        }
        _ => Err(Error::NoClosedForm(format!("R^{w}_beta({f}, {g}; t)"))),
    }
}

/// `∫_t w (f/F(t)) log[(f/F(t)) / (g/G(t))]`.
pub fn residual_weighted_kl(f: &Distribution, g: &Distribution, w: &WeightFn, t: f64, cfg: &QuadConfig) -> Result<f64> {
    let (lo, hi, lsf, lsg) = residual_pair_range(f, g, 1.0, t)?;
    f.integrate_with(
        |x| {
            let lf = f.log_density(x) - lsf;
            let lg = g.log_density(x) - lsg;
            if lf == f64::NEG_INFINITY {
                0.0
            } else {
                w.value(x) * lf.exp() * (lf - lg)
            }
        },
        lo,
        hi,
        &g.breakpoints(),
        cfg,
    )
    .map(|e| e.value)
    .map_err(|e| Error::divergent(format!("KL^{w}({f}, {g}; t={t})"), e))
}

/// `R^w_b(ψ(X), ψ(Y); t) = R^{w∘ψ}_b(X, Y; ψ^-1(t))` for increasing `ψ`.
/// A decreasing map turns residual lifetimes into past lifetimes, so it is
/// rejected.
pub fn verify_residual_transform(
    f: &Distribution,
    g: &Distribution,
    w: &WeightFn,
    map: MonotoneMap,
    beta: f64,
    t: f64,
    cfg: &QuadConfig,
) -> Result<IdentityReport> {
    if !map.is_increasing() {
        return Err(Error::domain(format!(
            "{map} is decreasing; residual transforms need an increasing map"
        )));
    }
    let tf = f.transformed(map)?;
    let tg = g.transformed(map)?;
    let lhs = residual_gwrigf(&tf, &tg, w, beta, t, cfg)?;
    let rhs = residual_gwrigf(f, g, &w.compose(map), beta, map.inverse(t), cfg)?;
    Ok(IdentityReport::new(lhs, rhs, RESIDUAL_TOL))
}
