//! Weighted information generating function `I^w_b(X) = ∫ w f^b` and the
//! measures derived from it.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta as beta_fn;
use statrs::function::gamma::gamma;

use crate::dist::{Distribution, MonotoneMap};
use crate::error::{Error, Result};
use crate::integrate::{integrate_pieces, QuadConfig};
use crate::weights::WeightFn;

/// `f^b`, with `0^b = 0` for every real `b`.
#[inline]
pub(crate) fn pow0(f: f64, b: f64) -> f64 {
    if f > 0.0 {
        f.powf(b)
    } else {
        0.0
    }
}

/// Integrate `g` over `[lo, hi]` with panels seeded by the breakpoints of
/// `d`; quadrature failures become `Divergent` errors labelled by `what`.
pub(crate) fn quad_over<F, W>(
    d: &Distribution,
    lo: f64,
    hi: f64,
    extra: &[f64],
    cfg: &QuadConfig,
    what: W,
    g: F,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    W: FnOnce() -> String,
{
    d.integrate_with(g, lo, hi, extra, cfg)
        .map(|e| e.value)
        .map_err(|e| Error::divergent(what(), e))
}

pub fn check_public_beta(beta: f64) -> Result<()> {
    if beta >= 1.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("beta must be a finite real >= 1, got {beta}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Closed,
    Quad,
    Both,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(Method::Closed),
            "quad" => Ok(Method::Quad),
            "both" => Ok(Method::Both),
            other => Err(Error::Parse(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IgfQuery {
    pub dist: Distribution,
    pub weight: WeightFn,
    pub beta: f64,
    pub quad: QuadConfig,
}

impl IgfQuery {
    pub fn new(dist: Distribution, weight: WeightFn, beta: f64) -> Result<Self> {
        check_public_beta(beta)?;
        Ok(IgfQuery {
            dist,
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

pub fn gwigf(q: &IgfQuery) -> Result<f64> {
    check_public_beta(q.beta)?;
    gwigf_ext(&q.dist, &q.weight, q.beta, &q.quad)
}

/// `∫ w f^beta` for any real `beta`; convergence is left to the quadrature.
pub fn gwigf_ext(d: &Distribution, w: &WeightFn, beta: f64, cfg: &QuadConfig) -> Result<f64> {
    let (lo, hi) = d.support();
    quad_over(
        d,
        lo,
        hi,
        &[],
        cfg,
        || format!("I^{w}_{beta}({d})"),
        |x| {
            let f = d.density(x);
            if f > 0.0 {
                w.value(x) * f.powf(beta)
            } else {
                0.0
            }
        },
    )
}

/// Result of an evaluation that may use a catalogued closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paper_flagged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed: Option<f64>,
}

impl Evaluation {
    pub(crate) fn assemble(
        method: Method,
        closed: impl FnOnce() -> Result<ClosedForm>,
        quad: impl FnOnce() -> Result<f64>,
    ) -> Result<Self> {
        let (c, q) = match method {
            Method::Closed => (Some(closed()?), None),
            Method::Quad => (None, Some(quad()?)),
            Method::Both => (Some(closed()?), Some(quad()?)),
        };
        Ok(Evaluation {
            value: q.or(c.as_ref().map(|c| c.value)).expect("one side computed"),
            method,
            closed: c.as_ref().map(|c| c.value),
            quad: q,
            paper_flagged: c.as_ref().map(|c| c.paper_flagged),
            printed: c.as_ref().filter(|c| c.paper_flagged).map(|c| c.printed),
        })
    }
}

pub fn evaluate(q: &IgfQuery, method: Method) -> Result<Evaluation> {
    check_public_beta(q.beta)?;
    Evaluation::assemble(
        method,
        || gwigf_closed(&q.dist, &q.weight, q.beta),
        || gwigf(q),
    )
}

/// A catalogued closed form. `value` is the verified expression; `printed`
/// is the published expression, which differs from `value` exactly when
/// `paper_flagged` is set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedForm {
    pub label: &'static str,
    pub value: f64,
    pub printed: f64,
    pub paper_flagged: bool,
}

impl ClosedForm {
    pub(crate) fn exact(label: &'static str, value: f64) -> Self {
        ClosedForm {
            label,
            value,
            printed: value,
            paper_flagged: false,
        }
    }

    pub(crate) fn flagged(label: &'static str, value: f64, printed: f64) -> Self {
        ClosedForm {
            label,
            value,
            printed,
            paper_flagged: true,
        }
    }
}

fn no_closed(d: &Distribution, w: &WeightFn) -> Error {
    Error::NoClosedForm(format!("I^{w}_beta({d})"))
}

fn finite_or(value: f64, what: impl FnOnce() -> String) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(format!("closed form for {} diverges here", what())))
    }
}

/// Closed forms for the worked (model, weight) pairs.
pub fn gwigf_closed(d: &Distribution, w: &WeightFn, beta: f64) -> Result<ClosedForm> {
    let b = beta;
    let cf = match (d, w) {
        (Distribution::Uniform { a, b: hi }, WeightFn::One) => {
            ClosedForm::exact("uniform/one", (hi - a).powf(1.0 - b))
        }
        (Distribution::Uniform { a, b: hi }, WeightFn::Identity) => ClosedForm::exact(
            "uniform/x",
            0.5 * (a + hi) * (1.0 / (hi - a)).powf(b - 1.0),
        ),
        (Distribution::Uniform { a, b: hi }, WeightFn::Reciprocal) if *a > 0.0 => {
            let log_ratio = (hi / a).ln();
            ClosedForm::flagged(
                "uniform/invx",
                (hi - a).powf(-b) * log_ratio,
                (hi - a).powf(b) * log_ratio,
            )
        }
        (Distribution::Exponential { rate }, WeightFn::One) => {
            ClosedForm::exact("exp/one", rate.powf(b - 1.0) / b)
        }
        (Distribution::Exponential { rate }, WeightFn::Identity) => {
            ClosedForm::exact("exp/x", rate.powf(b - 2.0) / (b * b))
        }
        (Distribution::Exponential { rate }, WeightFn::Power { m }) => ClosedForm::exact(
            "exp/pow",
            rate.powf(b) * gamma(m + 1.0) / (b * rate).powf(m + 1.0),
        ),
        (Distribution::Exponential { rate }, WeightFn::Shifted { b: s }) => {
            let lb = rate * b;
            ClosedForm::exact("exp/shift", rate.powf(b) * (1.0 + s * lb) / (lb * lb))
        }
        (Distribution::InvertedExponential { lambda }, WeightFn::Identity) => {
            if b <= 1.0 {
                return Err(Error::domain("inverted-exponential I^x needs beta > 1"));
            }
            ClosedForm::flagged(
                "invexp/x",
                lambda.powf(b - 2.0) * gamma(2.0 * b - 2.0) / b.powf(2.0 * b - 2.0),
                lambda.powf(b + 2.0) * gamma(2.0 * b + 2.0) / b.powf(2.0 * b + 2.0),
            )
        }
        (Distribution::InvertedExponential { lambda }, WeightFn::Reciprocal) => ClosedForm::exact(
            "invexp/invx",
            lambda.powf(b) * gamma(2.0 * b) / b.powf(2.0 * b),
        ),
        (Distribution::TriangularUp | Distribution::TriangularDown, WeightFn::One) => {
            ClosedForm::exact("triangular/one", 2f64.powf(b) / (b + 1.0))
        }
        (Distribution::TriangularUp, WeightFn::Identity) => {
            ClosedForm::exact("tri-up/x", 2f64.powf(b) / (b + 2.0))
        }
        (Distribution::TriangularDown, WeightFn::Identity) => {
            ClosedForm::exact("tri-down/x", 2f64.powf(b) * beta_fn(2.0, b + 1.0))
        }
        (Distribution::Weibull { shape, scale }, WeightFn::Identity) => {
            let (k, s) = (*shape, *scale);
            let common = k.powf(b - 1.0) * s.powf(2.0 - b) / b.powf((b * k - b + 2.0) / k);
            ClosedForm::flagged(
                "weibull/x",
                common * gamma((b * k - b + 2.0) / k),
                common * gamma((b * k - b + 1.0) / k),
            )
        }
        (
            Distribution::Transformed { base, map },
            WeightFn::Identity,
        ) if is_lomax(base, map).is_some() => {
            let c = is_lomax(base, map).expect("checked");
            let e = (c + 1.0) * b;
            ClosedForm::exact("lomax/x", c.powf(b) / ((e - 1.0) * (e - 2.0)))
        }
        _ => return Err(no_closed(d, w)),
    };
    finite_or(cf.value, || format!("I^{w}_{b}({d})"))?;
    Ok(cf)
}

/// Shape `c` when `base`/`map` describe a Lomax law.
pub(crate) fn is_lomax(base: &Distribution, map: &MonotoneMap) -> Option<f64> {
    match (base, map) {
        (Distribution::Pareto { shape, scale }, MonotoneMap::Affine { a, b })
            if *scale == 1.0 && *a == 1.0 && *b == -1.0 =>
        {
            Some(*shape)
        }
        _ => None,
    }
}

/// Weighted IGF for a finite distribution `p` with weights `w`.
pub fn gwigf_discrete(p: &[f64], w: &[f64], beta: f64) -> Result<f64> {
    if p.is_empty() || p.len() != w.len() {
        return Err(Error::domain("probability and weight vectors must be non-empty and equal length"));
    }
    if p.iter().any(|&pi| !(pi > 0.0 && pi <= 1.0)) {
        return Err(Error::domain("probabilities must lie in (0, 1]"));
    }
    if (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::domain("probabilities must sum to 1"));
    }
    if w.iter().any(|&wi| !(wi >= 0.0 && wi.is_finite())) {
        return Err(Error::domain("weights must be finite and non-negative"));
    }
    Ok(p.iter().zip(w).map(|(pi, wi)| wi * pi.powf(beta)).sum())
}

/// `∂^k/∂b^k I^w_b = ∫ w f^b (log f)^k`.
pub fn gwigf_derivative(q: &IgfQuery, k: u32) -> Result<f64> {
    check_public_beta(q.beta)?;
    gwigf_derivative_ext(&q.dist, &q.weight, q.beta, k, &q.quad)
}

pub fn gwigf_derivative_ext(
    d: &Distribution,
    w: &WeightFn,
    beta: f64,
    k: u32,
    cfg: &QuadConfig,
) -> Result<f64> {
    let (lo, hi) = d.support();
    let k = k as i32;
    quad_over(
        d,
        lo,
        hi,
        &[],
        cfg,
        || format!("d^{k} I^{w}_{beta}({d})"),
        |x| {
            let f = d.density(x);
            if f > 0.0 {
                w.value(x) * f.powf(beta) * f.ln().powi(k)
            } else {
                0.0
            }
        },
    )
}

/// `H^w_k = ∫ w (-log f)^k f`; `k = 0` is `E[w(X)]`, `k = 1` the weighted
/// Shannon entropy.
pub fn weighted_entropy_k(d: &Distribution, w: &WeightFn, k: u32, cfg: &QuadConfig) -> Result<f64> {
    let (lo, hi) = d.support();
    let k = k as i32;
    quad_over(
        d,
        lo,
        hi,
        &[],
        cfg,
        || format!("H^{w}_{k}({d})"),
        |x| {
            let f = d.density(x);
            if f > 0.0 {
                w.value(x) * (-f.ln()).powi(k) * f
            } else {
                0.0
            }
        },
    )
}

pub fn weighted_extropy(d: &Distribution, w: &WeightFn, cfg: &QuadConfig) -> Result<f64> {
    Ok(-0.5 * gwigf_ext(d, w, 2.0, cfg)?)
}

/// `E[(w log f)^2] - (E[w log f])^2`.
pub fn weighted_varentropy(d: &Distribution, w: &WeightFn, cfg: &QuadConfig) -> Result<f64> {
    let (lo, hi) = d.support();
    let moment = |p: i32| {
        quad_over(
            d,
            lo,
            hi,
            &[],
            cfg,
            || format!("varentropy moment {p} of {d}"),
            |x| {
                let f = d.density(x);
                if f > 0.0 {
                    (w.value(x) * f.ln()).powi(p) * f
                } else {
                    0.0
                }
            },
        )
    };
    let m1 = moment(1)?;
    let m2 = moment(2)?;
    Ok((m2 - m1 * m1).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesResult {
    pub value: f64,
    pub last_term: f64,
}

/// Partial sum `Σ_{k=0}^{K} (1-b)^k / k! H^w_k`.
pub fn gwigf_series(q: &IgfQuery, order: u32) -> Result<SeriesResult> {
    let mut sum = 0.0;
    let mut last = 0.0;
    let mut coef = 1.0;
    for k in 0..=order {
        if k > 0 {
            coef *= (1.0 - q.beta) / k as f64;
        }
        if coef == 0.0 {
            last = 0.0;
            continue;
        }
        last = coef * weighted_entropy_k(&q.dist, &q.weight, k, &q.quad)?;
        sum += last;
    }
    Ok(SeriesResult {
        value: sum,
        last_term: last.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub lower: f64,
    pub center: f64,
    pub upper: f64,
    pub satisfied: bool,
}

pub const BOUND_SLACK: f64 = 1e-9;

impl BoundsReport {
    pub fn new(lower: f64, center: f64, upper: f64) -> Self {
        let slack = BOUND_SLACK * center.abs().max(1.0);
        BoundsReport {
            lower,
            center,
            upper,
            satisfied: lower <= center + slack && center <= upper + slack,
        }
    }
}

/// `(I^{√w}_{(b+1)/2})^2 <= I^w_b <= sqrt(I^{w²}_{2b-1})`.
pub fn bounds_cs(q: &IgfQuery) -> Result<BoundsReport> {
    check_public_beta(q.beta)?;
    let (sw, qw) = q.weight.derived();
    let lower = gwigf_ext(&q.dist, &sw, 0.5 * (q.beta + 1.0), &q.quad)?;
    let center = gwigf_ext(&q.dist, &q.weight, q.beta, &q.quad)?;
    let upper = gwigf_ext(&q.dist, &qw, 2.0 * q.beta - 1.0, &q.quad)?;
    Ok(BoundsReport::new(lower * lower, center, upper.sqrt()))
}

/// `max{0, E w - b H^w} <= I^w_{b+1} <= E[w h^b]`.
pub fn bounds_hazard(d: &Distribution, w: &WeightFn, beta: f64, cfg: &QuadConfig) -> Result<BoundsReport> {
    check_public_beta(beta)?;
    let ew = weighted_entropy_k(d, w, 0, cfg)?;
    let hw = weighted_entropy_k(d, w, 1, cfg)?;
    let center = gwigf_ext(d, w, beta + 1.0, cfg)?;
    let (lo, hi) = d.support();
    let upper = quad_over(
        d,
        lo,
        hi,
        &[],
        cfg,
        || format!("E[{w} h^{beta}] under {d}"),
        |x| {
            let f = d.density(x);
            if f > 0.0 {
                let s = d.survival(x);
                w.value(x) * (f / s).powf(beta) * f
            } else {
                0.0
            }
        },
    )?;
    Ok(BoundsReport::new((ew - beta * hw).max(0.0), center, upper))
}

/// `I^w_b(ζ(X))` by change of variables over the support of `X`:
/// `∫ w(ζ(x)) f(x)^b |ζ'(x)|^{1-b} dx`. For decreasing `ζ` the reversed
/// orientation and the sign factor cancel, so the result is the (positive)
/// GWIGF of the transformed law.
pub fn gwigf_transformed(
    d: &Distribution,
    w: &WeightFn,
    map: MonotoneMap,
    beta: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    let (lo, hi) = d.support();
    map.map_interval(lo, hi)?;
    quad_over(
        d,
        lo,
        hi,
        &[],
        cfg,
        || format!("I^{w}_{beta}({map}({d}))"),
        |x| {
            let f = d.density(x);
            if f > 0.0 {
                w.value(map.apply(x)) * f.powf(beta) * map.derivative(x).abs().powf(1.0 - beta)
            } else {
                0.0
            }
        },
    )
}

/// Density of `X + Y` for independent `X`, `Y`.
pub fn convolution_density(dx: &Distribution, dy: &Distribution, z: f64, cfg: &QuadConfig) -> Result<f64> {
    let (ax, bx) = dx.support();
    let (ay, by) = dy.support();
    let lo = ax.max(z - by);
    let hi = bx.min(z - ay);
    if !(lo < hi) {
        return Ok(0.0);
    }
    let extra: Vec<f64> = dy.breakpoints().iter().map(|q| z - q).collect();
    quad_over(
        dx,
        lo,
        hi,
        &extra,
        cfg,
        || format!("convolution density at {z}"),
        |x| {
            let f = dx.density(x);
            if f > 0.0 {
                f * dy.density(z - x)
            } else {
                0.0
            }
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvolutionReport {
    pub value: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// `I^x_b(X+Y) <= I_b(X) I^y_b(Y) + I^x_b(X) I_b(Y)`; the left side is a
/// nested quadrature over the convolution density.
pub fn convolution_gwigf_bound(
    dx: &Distribution,
    dy: &Distribution,
    beta: f64,
    cfg: &QuadConfig,
) -> Result<ConvolutionReport> {
    check_public_beta(beta)?;
    let (ax, bx) = dx.support();
    let (ay, by) = dy.support();
    let (lo, hi) = (ax + ay, bx + by);
    let inner = QuadConfig {
        rel_tol: (cfg.rel_tol * 0.1).max(1e-13),
        ..*cfg
    };
    let mut extra: Vec<f64> = Vec::new();
    for p in dx.breakpoints() {
        for q in dy.breakpoints() {
            extra.push(p + q);
        }
    }
    // kinks of the convolution sit at sums of finite support endpoints
    for p in [ax, bx] {
        for q in [ay, by] {
            extra.push(p + q);
        }
    }
    extra.retain(|v| v.is_finite() && *v > lo && *v < hi);
    extra.sort_by(f64::total_cmp);
    extra.dedup();
    let mut points = vec![lo];
    points.extend(extra);
    points.push(hi);
    let value = integrate_pieces(
        |z| match convolution_density(dx, dy, z, &inner) {
            Ok(fz) => z * pow0(fz, beta),
            Err(_) => f64::NAN,
        },
        &points,
        cfg,
    )
    .map_err(|e| Error::divergent(format!("I^x_{beta}({dx} + {dy})"), e))?
    .value;
    let one = WeightFn::One;
    let x = WeightFn::Identity;
    let bound = gwigf_ext(dx, &one, beta, cfg)? * gwigf_ext(dy, &x, beta, cfg)?
        + gwigf_ext(dx, &x, beta, cfg)? * gwigf_ext(dy, &one, beta, cfg)?;
    Ok(ConvolutionReport {
        value,
        bound,
        satisfied: value <= bound + 1e-8,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingCell {
    pub beta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub premises_hold: bool,
    pub premise_failures: Vec<String>,
    pub cells: Vec<OrderingCell>,
    /// First grid point where the premises hold but the conclusion fails.
    pub first_violation: Option<f64>,
}

const U_GRID: usize = 99;

fn u_grid() -> impl Iterator<Item = f64> {
    (1..=U_GRID).map(|i| i as f64 / (U_GRID + 1) as f64)
}

/// Premises: `w1` increasing, `w1 >= w2`, and `X <=_disp Y` checked through
/// `f(F^-1(u)) >= g(G^-1(u))`. Conclusion: `I^{w1}_b(X) >= I^{w2}_b(Y)`.
pub fn ordering_check(
    dx: &Distribution,
    dy: &Distribution,
    w1: &WeightFn,
    w2: &WeightFn,
    betas: &[f64],
    cfg: &QuadConfig,
) -> Result<OrderingReport> {
    let mut failures = Vec::new();
    let mut xs: Vec<f64> = Vec::new();
    let mut disp_ok = true;
    for u in u_grid() {
        let qx = dx.quantile(u)?;
        let qy = dy.quantile(u)?;
        xs.push(qx);
        xs.push(qy);
        let fx = dx.density(qx);
        let gy = dy.density(qy);
        if fx < gy * (1.0 - 1e-12) {
            disp_ok = false;
        }
    }
    if !disp_ok {
        failures.push("dispersive order f(F^-1(u)) >= g(G^-1(u)) fails on the u-grid".to_string());
    }
    xs.sort_by(f64::total_cmp);
    if xs.windows(2).any(|p| w1.value(p[1]) < w1.value(p[0]) - 1e-12) {
        failures.push(format!("{w1} is not increasing on the grid"));
    }
    if xs.iter().any(|&x| w1.value(x) < w2.value(x) - 1e-12) {
        failures.push(format!("{w1} >= {w2} fails on the grid"));
    }
    let premises_hold = failures.is_empty();
    let mut cells = Vec::with_capacity(betas.len());
    let mut first_violation = None;
    for &b in betas {
        check_public_beta(b)?;
        let lhs = gwigf_ext(dx, w1, b, cfg)?;
        let rhs = gwigf_ext(dy, w2, b, cfg)?;
        let holds = lhs >= rhs - BOUND_SLACK * rhs.abs().max(1.0);
        if premises_hold && !holds && first_violation.is_none() {
            first_violation = Some(b);
        }
        cells.push(OrderingCell { beta: b, lhs, rhs, holds });
    }
    Ok(OrderingReport {
        premises_hold,
        premise_failures: failures,
        cells,
        first_violation,
    })
}
