//! Maximum-likelihood fits, information criteria and the two survival data
//! sets used in the examples.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dist::{Distribution, Sample, SampleSource};
use crate::error::{Error, Result};

/// Remission times (months) of 128 bladder cancer patients.
pub const BLADDER: [f64; 128] = [
    0.08, 0.20, 0.40, 0.50, 0.51, 0.81, 0.90, 1.05, 1.19, 1.26, 1.35, 1.40, 1.46, 1.76, 2.02, 2.02,
    2.07, 2.09, 2.23, 2.26, 2.46, 2.54, 2.62, 2.64, 2.69, 2.69, 2.75, 2.83, 2.87, 3.02, 3.25, 3.31,
    3.36, 3.36, 3.48, 3.52, 3.57, 3.64, 3.70, 3.82, 3.88, 4.18, 4.23, 4.26, 4.33, 4.34, 4.40, 4.50,
    4.51, 4.87, 4.98, 5.06, 5.09, 5.17, 5.32, 5.32, 5.34, 5.41, 5.41, 5.49, 5.62, 5.71, 5.85, 6.25,
    6.54, 6.76, 6.93, 6.94, 6.97, 7.09, 7.26, 7.28, 7.32, 7.39, 7.59, 7.62, 7.63, 7.66, 7.87, 7.93,
    8.26, 8.37, 8.53, 8.65, 8.66, 9.02, 9.22, 9.47, 9.74, 10.06, 10.34, 10.66, 10.75, 11.25, 11.64,
    11.79, 11.98, 12.02, 12.03, 12.07, 12.63, 13.11, 13.29, 13.80, 14.24, 14.76, 14.77, 14.83,
    15.96, 16.62, 17.12, 17.14, 17.36, 18.10, 19.13, 20.28, 21.73, 22.69, 23.63, 25.74, 25.82,
    26.31, 32.15, 34.26, 36.66, 43.01, 46.12, 79.05,
];

/// Relief times (hours) of 20 patients given an analgesic.
pub const RELIEF: [f64; 20] = [
    1.1, 1.2, 1.3, 1.4, 1.4, 1.5, 1.6, 1.6, 1.7, 1.7, 1.7, 1.8, 1.8, 1.9, 2.0, 2.2, 2.3, 2.7, 3.0,
    4.1,
];

/// Bandwidth used with each data set in the real-data bootstrap.
pub const BLADDER_BANDWIDTH: f64 = 0.20;
pub const RELIEF_BANDWIDTH: f64 = 0.56;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Fixture {
    Bladder,
    Relief,
}

impl Fixture {
    pub fn values(&self) -> &'static [f64] {
        match self {
            Fixture::Bladder => &BLADDER,
            Fixture::Relief => &RELIEF,
        }
    }

    pub fn bandwidth(&self) -> f64 {
        match self {
            Fixture::Bladder => BLADDER_BANDWIDTH,
            Fixture::Relief => RELIEF_BANDWIDTH,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Fixture::Bladder => "bladder",
            Fixture::Relief => "relief",
        }
    }
}

impl FromStr for Fixture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bladder" => Ok(Fixture::Bladder),
            "relief" => Ok(Fixture::Relief),
            _ => Err(Error::Parse(format!("unknown data set `{s}` (expected bladder or relief)"))),
        }
    }
}

pub fn load_fixture(f: Fixture) -> Sample {
    Sample::from_parts(
        f.values().to_vec(),
        SampleSource::Fixture {
            name: f.name().to_string(),
        },
    )
    .expect("fixtures are valid samples")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GofModel {
    Exponential,
    Gumbel2,
}

impl GofModel {
    pub fn id(&self) -> &'static str {
        match self {
            GofModel::Exponential => "exponential",
            GofModel::Gumbel2 => "gumbel2",
        }
    }

    pub fn parameters(&self) -> usize {
        match self {
            GofModel::Exponential => 1,
            GofModel::Gumbel2 => 2,
        }
    }
}

impl fmt::Display for GofModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for GofModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(GofModel::Exponential),
            "gumbel2" | "gumbel-ii" | "gumbel" => Ok(GofModel::Gumbel2),
            _ => Err(Error::Parse(format!("unknown model `{s}` (expected exp or gumbel2)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: GofModel,
    pub params: BTreeMap<&'static str, f64>,
    pub log_likelihood: f64,
    pub k: usize,
    pub n: usize,
}

impl FitResult {
    pub fn distribution(&self) -> Result<Distribution> {
        match self.model {
            GofModel::Exponential => Distribution::exponential(self.params["lambda"]),
            GofModel::Gumbel2 => Distribution::gumbel2(self.params["alpha"], self.params["lambda"]),
        }
    }
}

pub const GUMBEL_ALPHA_TOL: f64 = 1e-8;
const MAX_ITER: usize = 200;

/// `n / Σ x^(-α)` together with the profiled score at `α`.
fn gumbel_profile(xs: &[f64], alpha: f64) -> (f64, f64) {
    let n = xs.len() as f64;
    let logs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let m = logs.iter().map(|l| -alpha * l).fold(f64::NEG_INFINITY, f64::max);
    let (mut s, mut sl) = (0.0, 0.0);
    for l in &logs {
        let w = (-alpha * l - m).exp();
        s += w;
        sl += w * l;
    }
    let lambda = n / (s * m.exp());
    let score = n / alpha + n * sl / s - logs.iter().sum::<f64>();
    (lambda, score)
}

/// Derivative of the profiled Gumbel-II log-likelihood in `α`.
pub fn gumbel_profile_score(s: &Sample, alpha: f64) -> f64 {
    gumbel_profile(s.values(), alpha).1
}

fn fit_gumbel2(s: &Sample) -> Result<(f64, f64)> {
    let xs = s.values();
    if xs[0] <= 0.0 {
        return Err(Error::domain("Gumbel-II fit needs strictly positive data"));
    }
    if xs[0] == xs[xs.len() - 1] {
        return Err(Error::ZeroSpread);
    }
    // the profile is concave, so the score has a single sign change
    let mut lo = 1e-3;
    let mut hi = 1.0;
    let mut iter = 0;
    while gumbel_profile(xs, lo).1 <= 0.0 {
        lo *= 0.5;
        iter += 1;
        if iter > MAX_ITER {
            return Err(Error::NonConvergence("Gumbel-II shape bracket (lower)".into()));
        }
    }
    while gumbel_profile(xs, hi).1 >= 0.0 {
        lo = hi;
        hi *= 2.0;
        iter += 1;
        if iter > MAX_ITER {
            return Err(Error::NonConvergence("Gumbel-II shape bracket (upper)".into()));
        }
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if gumbel_profile(xs, mid).1 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < GUMBEL_ALPHA_TOL {
            let alpha = 0.5 * (lo + hi);
            return Ok((alpha, gumbel_profile(xs, alpha).0));
        }
    }
    Err(Error::NonConvergence(format!(
        "Gumbel-II shape after {MAX_ITER} bisection steps"
    )))
}

pub fn fit_mle(model: GofModel, s: &Sample) -> Result<FitResult> {
    let mut params = BTreeMap::new();
    let d = match model {
        GofModel::Exponential => {
            let m = s.mean();
            if !(m > 0.0) {
                return Err(Error::domain("exponential fit needs a positive mean"));
            }
            params.insert("lambda", 1.0 / m);
            Distribution::exponential(1.0 / m)?
        }
        GofModel::Gumbel2 => {
            let (alpha, lambda) = fit_gumbel2(s)?;
            params.insert("alpha", alpha);
            params.insert("lambda", lambda);
            Distribution::gumbel2(alpha, lambda)?
        }
    };
    let log_likelihood = d.log_likelihood(s);
    if !log_likelihood.is_finite() {
        return Err(Error::domain(format!("{model} log-likelihood is not finite")));
    }
    Ok(FitResult {
        model,
        params,
        log_likelihood,
        k: model.parameters(),
        n: s.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriteriaRow {
    pub neg_log_l: f64,
    pub aic: f64,
    /// Undefined (None) when `n <= k + 1`.
    pub aicc: Option<f64>,
    pub bic: f64,
}

pub fn criteria(neg_log_l: f64, k: usize, n: usize) -> CriteriaRow {
    let kf = k as f64;
    let aic = 2.0 * kf + 2.0 * neg_log_l;
    let aicc = (n > k + 1).then(|| aic + 2.0 * kf * (kf + 1.0) / (n - k - 1) as f64);
    CriteriaRow {
        neg_log_l,
        aic,
        aicc,
        bic: kf * (n as f64).ln() + 2.0 * neg_log_l,
    }
}

pub fn information_criteria(f: &FitResult) -> CriteriaRow {
    criteria(-f.log_likelihood, f.k, f.n)
}

#[derive(Debug, Clone, Serialize)]
pub struct GofRow {
    pub fit: FitResult,
    pub criteria: CriteriaRow,
}

#[derive(Debug, Clone, Serialize)]
pub struct GofReport {
    /// Ascending by AIC, then BIC, then model id.
    pub rows: Vec<GofRow>,
    pub failures: Vec<(GofModel, String)>,
}

pub fn rank_rows(rows: &mut [GofRow]) {
    rows.sort_by(|a, b| {
        a.criteria
            .aic
            .total_cmp(&b.criteria.aic)
            .then(a.criteria.bic.total_cmp(&b.criteria.bic))
            .then(a.fit.model.id().cmp(b.fit.model.id()))
    });
}

pub fn gof_report(s: &Sample, models: &[GofModel]) -> Result<GofReport> {
    if models.is_empty() {
        return Err(Error::domain("no models requested"));
    }
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut last = None;
    for &m in models {
        match fit_mle(m, s) {
            Ok(fit) => rows.push(GofRow {
                criteria: information_criteria(&fit),
                fit,
            }),
            Err(e) => {
                failures.push((m, e.to_string()));
                last = Some(e);
            }
        }
    }
    if rows.is_empty() {
        return Err(last.expect("at least one model was tried"));
    }
    rank_rows(&mut rows);
    Ok(GofReport { rows, failures })
}
