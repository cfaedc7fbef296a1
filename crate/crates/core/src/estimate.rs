//! Kernel and plug-in estimators of the residual GWIGF with `w(x) = x`, and
//! the bootstrap / Monte Carlo harness that scores them.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::dist::{Distribution, Sample};
use crate::error::{Error, Result};
use crate::integrate::{integrate_pieces, QuadConfig};
use crate::residual::exponential_plugin_form;

/// Kernel support is cut at this many bandwidths.
const KERNEL_REACH: f64 = 9.0;
/// Upper integration limit of the estimator, in bandwidths past the sample maximum.
pub const UPPER_BANDWIDTHS: f64 = 8.0;
/// Estimated survival below this makes the estimator undefined.
pub const MIN_KDE_SURVIVAL: f64 = 1e-10;
const MAX_PANELS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "rule", content = "value")]
pub enum Bandwidth {
    Fixed(f64),
    Silverman,
}

impl std::str::FromStr for Bandwidth {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "silverman" {
            return Ok(Bandwidth::Silverman);
        }
        let b: f64 = s
            .parse()
            .map_err(|_| Error::Parse(format!("bandwidth must be a positive number or `silverman`, got `{s}`")))?;
        if b > 0.0 && b.is_finite() {
            Ok(Bandwidth::Fixed(b))
        } else {
            Err(Error::domain(format!("bandwidth must be positive, got {b}")))
        }
    }
}

impl Bandwidth {
    pub fn resolve(&self, xs: &[f64]) -> Result<f64> {
        match *self {
            Bandwidth::Fixed(b) => Ok(b),
            Bandwidth::Silverman => silverman(xs),
        }
    }
}

/// Gaussian kernel density estimate.
#[derive(Debug, Clone)]
pub struct Kde {
    xs: Vec<f64>,
    b: f64,
}

impl Kde {
    pub fn new(values: &[f64], bandwidth: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::domain(format!("bandwidth must be positive, got {bandwidth}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("sample values must be finite"));
        }
        let mut xs = values.to_vec();
        xs.sort_by(f64::total_cmp);
        Ok(Kde { xs, b: bandwidth })
    }

    pub fn from_sample(s: &Sample, bandwidth: Bandwidth) -> Result<Self> {
        Kde::new(s.values(), bandwidth.resolve(s.values())?)
    }

    pub fn bandwidth(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    fn window(&self, x: f64) -> (usize, usize) {
        let r = KERNEL_REACH * self.b;
        let lo = self.xs.partition_point(|&v| v < x - r);
        let hi = self.xs.partition_point(|&v| v <= x + r);
        (lo, hi)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.window(x);
        let inv = 1.0 / self.b;
        let s: f64 = self.xs[lo..hi]
            .iter()
            .map(|&v| {
                let z = (x - v) * inv;
                (-0.5 * z * z).exp()
            })
            .sum();
        s * inv / (self.xs.len() as f64 * (2.0 * PI).sqrt())
    }

    /// `∫_t^∞ pdf`, as the average of the normal tails at each point.
    pub fn survival(&self, t: f64) -> f64 {
        let (lo, hi) = self.window(t);
        let inv = 1.0 / self.b;
        let s: f64 = self.xs[lo..hi]
            .iter()
            .map(|&v| 0.5 * erfc((t - v) * inv * FRAC_1_SQRT_2))
            .sum();
        (s + (self.xs.len() - hi) as f64) / self.xs.len() as f64
    }

    pub fn max(&self) -> f64 {
        *self.xs.last().expect("non-empty")
    }
}

/// Kernel estimate of `∫_t^∞ x (f / S(t))^b dx`, integrated up to
/// `max(sample) + 8 b_n`.
pub fn np_residual_gwigf(kde: &Kde, beta: f64, t: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite() && t.is_finite()) {
        return Err(Error::domain(format!("need finite beta > 0 and finite t, got ({beta}, {t})")));
    }
    let upper = kde.max() + UPPER_BANDWIDTHS * kde.b;
    let s = kde.survival(t);
    if !(s > MIN_KDE_SURVIVAL) || t >= upper {
        return Err(Error::DeadAt { t });
    }
    let panels = (((upper - t) / kde.b).ceil() as usize).clamp(1, MAX_PANELS);
    let points: Vec<f64> = (0..=panels)
        .map(|i| t + (upper - t) * i as f64 / panels as f64)
        .collect();
    let ls = s.ln();
    let cfg = QuadConfig {
        rel_tol: 1e-8,
        ..QuadConfig::default()
    };
    integrate_pieces(
        |x| {
            let f = kde.pdf(x);
            if f > 0.0 {
                x * (beta * (f.ln() - ls)).exp()
            } else {
                0.0
            }
        },
        &points,
        &cfg,
    )
    .map(|e| e.value)
    .map_err(|e| Error::divergent(format!("kernel estimate at (beta={beta}, t={t})"), e))
}

fn quantile_sorted(xs: &[f64], p: f64) -> f64 {
    let h = (xs.len() - 1) as f64 * p;
    let i = h.floor() as usize;
    let frac = h - i as f64;
    if i + 1 < xs.len() {
        xs[i] + frac * (xs[i + 1] - xs[i])
    } else {
        xs[i]
    }
}

/// `0.9 min(sd, IQR / 1.34) n^(-1/5)`, falling back to `sd` when the IQR
/// vanishes.
pub fn silverman(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if n < 2 {
        return Err(Error::domain("bandwidth rule needs at least two observations"));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&xs, 0.75) - quantile_sorted(&xs, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let b = 0.9 * spread * (n as f64).powf(-0.2);
    if b > 0.0 && b.is_finite() {
        Ok(b)
    } else {
        Err(Error::ZeroSpread)
    }
}

pub fn silverman_bandwidth(s: &Sample) -> Result<f64> {
    silverman(s.values())
}

/// Exponential MLE `1 / mean`.
pub fn mle_rate_exponential(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean > 0.0 && mean.is_finite() {
        Ok(1.0 / mean)
    } else {
        Err(Error::domain(format!("exponential MLE needs a positive mean, got {mean}")))
    }
}

/// Plug-in estimate `λ^b (bλt + 1) / (bλ)^2`.
pub fn parametric_residual_gwigf_exp(lambda: f64, beta: f64, t: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("rate must be positive, got {lambda}")));
    }
    Ok(exponential_plugin_form(lambda, beta, t).value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resampling {
    /// Bootstrap resamples drawn with replacement from the base sample.
    WithReplacement,
    /// Every "resample" is the base sample itself.
    Identity,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GridSource {
    /// Fresh base samples of each size in `ns` drawn from `model`.
    Generated {
        #[serde(serialize_with = "crate::estimate::display")]
        model: Distribution,
    },
    /// A fixed data set; `ns` is ignored and the sample size is its length.
    Fixed { values: Vec<f64> },
}

pub(crate) fn display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentGrid {
    pub betas: Vec<f64>,
    pub ts: Vec<f64>,
    pub ns: Vec<usize>,
    /// Independent base samples per sample size.
    pub replications: usize,
    /// Resamples per base sample and cell.
    pub bootstrap: usize,
    pub seed: u64,
    pub source: GridSource,
    pub bandwidth: Bandwidth,
    pub resampling: Resampling,
}

impl ExperimentGrid {
    /// The simulation grid of the exponential study: `λ = 0.5`,
    /// `β ∈ {1.2, 1.7, 2.5}`, `t ∈ {0.1, 0.2, 0.5, 0.7, 0.9}`,
    /// `n ∈ {30, 50, 70, 100}`.
    pub fn exponential_study(bootstrap: usize, replications: usize, seed: u64) -> Self {
        ExperimentGrid {
            betas: vec![1.2, 1.7, 2.5],
            ts: vec![0.1, 0.2, 0.5, 0.7, 0.9],
            ns: vec![30, 50, 70, 100],
            replications,
            bootstrap,
            seed,
            source: GridSource::Generated {
                model: Distribution::Exponential { rate: 0.5 },
            },
            bandwidth: Bandwidth::Silverman,
            resampling: Resampling::WithReplacement,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() || self.ts.is_empty() {
            return Err(Error::domain("grid needs at least one beta and one t"));
        }
        if self.replications == 0 || self.bootstrap == 0 {
            return Err(Error::domain("replication and bootstrap counts must be at least 1"));
        }
        if self.betas.len() >= 1 << 12 || self.ts.len() >= 1 << 12 || self.ns.len() >= 1 << 12 {
            return Err(Error::domain("grid axes are limited to 4095 entries"));
        }
        if self.replications >= 1 << 20 {
            return Err(Error::domain("replication count is limited to 2^20 - 1"));
        }
        if let Some(b) = self.betas.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::domain(format!("beta must be positive, got {b}")));
        }
        match &self.source {
            GridSource::Generated { .. } if self.ns.is_empty() || self.ns.contains(&0) => {
                Err(Error::domain("sample sizes must be at least 1"))
            }
            GridSource::Fixed { values } if values.is_empty() => Err(Error::EmptySample),
            _ => Ok(()),
        }
    }

    fn sizes(&self) -> Vec<usize> {
        match &self.source {
            GridSource::Generated { .. } => self.ns.clone(),
            GridSource::Fixed { values } => vec![values.len()],
        }
    }
}

const STREAM_BASE: u64 = 1;
const STREAM_RESAMPLE: u64 = 2;

/// Stream id packing (kind, β-index, t-index, n-index, replicate).
pub fn stream_id(kind: u64, bi: usize, ti: usize, ni: usize, rep: usize) -> u64 {
    (kind << 56) | ((bi as u64) << 44) | ((ti as u64) << 32) | ((ni as u64) << 20) | rep as u64
}

pub fn cell_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Base sample `rep` of size index `ni`; shared by the kernel and plug-in
/// harnesses so that both see the same data.
pub fn base_sample(grid: &ExperimentGrid, ni: usize, rep: usize) -> Result<Vec<f64>> {
    match &grid.source {
        GridSource::Generated { model } => {
            let mut rng = cell_rng(grid.seed, stream_id(STREAM_BASE, 0, 0, ni, rep));
            model.sample_with(grid.ns[ni], &mut rng)
        }
        GridSource::Fixed { values } => Ok(values.clone()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub beta: f64,
    pub t: f64,
    pub n: usize,
    pub truth: f64,
    pub bias: Option<f64>,
    pub mse: Option<f64>,
    pub estimate_mean: Option<f64>,
    /// Estimates that failed (e.g. vanishing estimated survival).
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
}

impl ReportTable {
    pub fn get(&self, beta: f64, t: f64, n: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.beta == beta && r.t == t && r.n == n)
    }

    /// CSV with columns `beta,t,n,bias,mse`; invalid cells are left empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.to_string());
        out.write_record(["beta", "t", "n", "bias", "mse"]).map_err(io)?;
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            out.write_record([
                r.beta.to_string(),
                r.t.to_string(),
                r.n.to_string(),
                cell(r.bias),
                cell(r.mse),
            ])
            .map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }
}

struct Acc {
    sum: f64,
    sq: f64,
    count: usize,
    failures: usize,
}

impl Acc {
    fn new() -> Self {
        Acc { sum: 0.0, sq: 0.0, count: 0, failures: 0 }
    }

    fn push(&mut self, est: Result<f64>, truth: f64) {
        match est {
            Ok(v) if v.is_finite() => {
                self.sum += v;
                self.sq += (v - truth) * (v - truth);
                self.count += 1;
            }
            _ => self.failures += 1,
        }
    }

    fn row(&self, beta: f64, t: f64, n: usize, truth: f64) -> ReportRow {
        let valid = self.count > 0 && self.failures == 0;
        let k = self.count as f64;
        ReportRow {
            beta,
            t,
            n,
            truth,
            bias: valid.then(|| self.sum / k - truth),
            mse: valid.then(|| self.sq / k),
            estimate_mean: (self.count > 0).then(|| self.sum / k),
            failures: self.failures,
        }
    }
}

struct Cell {
    bi: usize,
    ti: usize,
    ni: usize,
}

fn cells(grid: &ExperimentGrid) -> Vec<Cell> {
    let sizes = grid.sizes();
    let mut v = Vec::new();
    for bi in 0..grid.betas.len() {
        for ti in 0..grid.ts.len() {
            for ni in 0..sizes.len() {
                v.push(Cell { bi, ti, ni });
            }
        }
    }
    v
}

/// Bootstrap bias and MSE of the kernel estimator against `truth(β, t)`.
/// Each cell pools `replications × bootstrap` estimates; the resample stream
/// of a cell depends only on the master seed and the cell's indices, so the
/// table is identical however the cells are scheduled.
pub fn bootstrap_bias_mse<T>(grid: &ExperimentGrid, truth: T) -> Result<ReportTable>
where
    T: Fn(f64, f64) -> f64 + Sync,
{
    grid.validate()?;
    let sizes = grid.sizes();
    let bases: Vec<Vec<Vec<f64>>> = (0..sizes.len())
        .map(|ni| (0..grid.replications).map(|r| base_sample(grid, ni, r)).collect())
        .collect::<Result<_>>()?;
    let rows = cells(grid)
        .par_iter()
        .map(|c| {
            let (beta, t, n) = (grid.betas[c.bi], grid.ts[c.ti], sizes[c.ni]);
            let tv = truth(beta, t);
            let mut acc = Acc::new();
            let mut buf = vec![0.0; n];
            for (rep, base) in bases[c.ni].iter().enumerate() {
                let mut rng = cell_rng(grid.seed, stream_id(STREAM_RESAMPLE, c.bi, c.ti, c.ni, rep));
                for _ in 0..grid.bootstrap {
                    let xs: &[f64] = match grid.resampling {
                        Resampling::WithReplacement => {
                            for slot in buf.iter_mut() {
                                *slot = base[rng.gen_range(0..n)];
                            }
                            &buf
                        }
                        Resampling::Identity => base,
                    };
                    let est = grid
                        .bandwidth
                        .resolve(xs)
                        .and_then(|b| Kde::new(xs, b))
                        .and_then(|k| np_residual_gwigf(&k, beta, t));
                    acc.push(est, tv);
                }
            }
            acc.row(beta, t, n, tv)
        })
        .collect();
    Ok(ReportTable { rows })
}

/// Kernel estimates on a fixed data set at every `(β, t)`.
pub fn np_estimates(values: &[f64], bandwidth: Bandwidth, betas: &[f64], ts: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    let kde = Kde::new(values, bandwidth.resolve(values)?)?;
    let mut out = Vec::new();
    for &b in betas {
        for &t in ts {
            out.push((b, t, np_residual_gwigf(&kde, b, t)?));
        }
    }
    Ok(out)
}

/// Bootstrap of a fixed data set, scored against the full-sample kernel
/// estimate at each `(β, t)`.
pub fn bootstrap_fixed(grid: &ExperimentGrid) -> Result<ReportTable> {
    let values = match &grid.source {
        GridSource::Fixed { values } => values.clone(),
        GridSource::Generated { .. } => {
            return Err(Error::domain("bootstrap_fixed needs a fixed data set"));
        }
    };
    let point = np_estimates(&values, grid.bandwidth, &grid.betas, &grid.ts)?;
    bootstrap_bias_mse(grid, |b, t| {
        point
            .iter()
            .find(|p| p.0 == b && p.1 == t)
            .map(|p| p.2)
            .unwrap_or(f64::NAN)
    })
}

/// Monte Carlo bias and MSE of the exponential plug-in estimator: each of
/// the `replications` base samples yields `λ̂ = 1 / mean` and one estimate
/// per `(β, t)`.
pub fn monte_carlo_parametric<T>(grid: &ExperimentGrid, truth: T) -> Result<ReportTable>
where
    T: Fn(f64, f64) -> f64 + Sync,
{
    grid.validate()?;
    let sizes = grid.sizes();
    let lambdas: Vec<Vec<Result<f64>>> = (0..sizes.len())
        .into_par_iter()
        .map(|ni| {
            (0..grid.replications)
                .map(|r| base_sample(grid, ni, r).and_then(|xs| mle_rate_exponential(&xs)))
                .collect()
        })
        .collect();
    let rows = cells(grid)
        .iter()
        .map(|c| {
            let (beta, t, n) = (grid.betas[c.bi], grid.ts[c.ti], sizes[c.ni]);
            let tv = truth(beta, t);
            let mut acc = Acc::new();
            for l in &lambdas[c.ni] {
                let est = l.clone().and_then(|l| parametric_residual_gwigf_exp(l, beta, t));
                acc.push(est, tv);
            }
            acc.row(beta, t, n, tv)
        })
        .collect();
    Ok(ReportTable { rows })
}

/// Residual GWIGF of `exp(λ)` with `w(x) = x`, the truth of the exponential study.
pub fn exponential_truth(lambda: f64) -> impl Fn(f64, f64) -> f64 + Sync {
    move |beta, t| exponential_plugin_form(lambda, beta, t).value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::integrate;

    #[test]
    fn kde_examples() {
        let k = Kde::new(&[0.0], 1.0).unwrap();
        assert!((k.pdf(0.0) - 0.398942).abs() < 1e-6);
        assert!((k.survival(0.0) - 0.5).abs() < 1e-15);
        let k = Kde::new(&[1.0, 2.0, 3.0], 1.0).unwrap();
        assert!((k.pdf(2.0) - 0.294295).abs() < 1e-6);
        assert!((k.survival(2.0) - 0.5).abs() < 1e-15);
        assert!((k.survival(-1e6) - 1.0).abs() < 1e-9);
        assert!((k.pdf(2.7) - k.pdf(1.3)).abs() < 1e-15);
        assert!(matches!(Kde::new(&[], 1.0), Err(Error::EmptySample)));
    }

    #[test]
    fn kde_integrates_to_one() {
        let xs = [0.3, 1.7, 2.2, 5.0, 5.1];
        let k = Kde::new(&xs, 0.4).unwrap();
        let v = integrate(|x| k.pdf(x), f64::NEG_INFINITY, f64::INFINITY, &QuadConfig::default())
            .unwrap()
            .value;
        assert!((v - 1.0).abs() < 1e-6);
        let s = integrate(|x| k.pdf(x), 2.0, f64::INFINITY, &QuadConfig::default()).unwrap().value;
        assert!((s - k.survival(2.0)).abs() < 1e-9);
    }

    #[test]
    fn estimator_examples() {
        let k = Kde::new(&[1.0, 2.0, 3.0], 0.1).unwrap();
        assert!((np_residual_gwigf(&k, 1.0, 0.0).unwrap() - 2.0).abs() < 0.05);
        let k = Kde::new(&[1.0, 2.0, 3.0], 0.3).unwrap();
        assert!(np_residual_gwigf(&k, 2.0, 3.0 + 10.0 * 0.3).is_err());
        let d = Distribution::exponential(0.5).unwrap();
        let s = d.sample(10_000, 7).unwrap();
        let k = Kde::from_sample(&s, Bandwidth::Silverman).unwrap();
        let truth = exponential_plugin_form(0.5, 2.0, 0.5).value;
        assert!((np_residual_gwigf(&k, 2.0, 0.5).unwrap() - truth).abs() < 0.05);
    }

    #[test]
    fn silverman_examples() {
        assert!(matches!(silverman(&[2.0; 10]), Err(Error::ZeroSpread)));
        let s = Distribution::exponential(1.0).unwrap().sample(100, 42).unwrap();
        let b = silverman_bandwidth(&s).unwrap();
        assert!(b > 0.1 && b < 0.6, "{b}");
        let scaled: Vec<f64> = s.values().iter().map(|v| 3.5 * v).collect();
        assert!((silverman(&scaled).unwrap() - 3.5 * b).abs() < 1e-12);
        // IQR of zero falls back to the standard deviation
        let b = silverman(&[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 9.0]).unwrap();
        assert!(b > 0.0);
    }

    #[test]
    fn mle_examples() {
        assert_eq!(mle_rate_exponential(&[1.0, 2.0, 3.0]).unwrap(), 0.5);
        assert!((mle_rate_exponential(&[2.0, 4.0, 6.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!(mle_rate_exponential(&[0.0, 0.0]).is_err());
        assert!((parametric_residual_gwigf_exp(1.0, 2.0, 1.0).unwrap() - 0.75).abs() < 1e-15);
        assert!((parametric_residual_gwigf_exp(0.4, 1.0, 0.0).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn identity_resampling_gives_single_estimate() {
        let mut g = ExperimentGrid::exponential_study(1, 1, 9);
        g.betas = vec![1.7];
        g.ts = vec![0.5];
        g.ns = vec![40];
        g.resampling = Resampling::Identity;
        let truth = exponential_truth(0.5);
        let table = bootstrap_bias_mse(&g, &truth).unwrap();
        let base = base_sample(&g, 0, 0).unwrap();
        let k = Kde::new(&base, silverman(&base).unwrap()).unwrap();
        let est = np_residual_gwigf(&k, 1.7, 0.5).unwrap();
        let row = &table.rows[0];
        assert_eq!(row.bias.unwrap(), est - truth(1.7, 0.5));
        assert!((row.mse.unwrap() - row.bias.unwrap().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn reports_are_deterministic() {
        let mut g = ExperimentGrid::exponential_study(5, 2, 11);
        g.ns = vec![20, 40];
        g.ts = vec![0.1, 0.9];
        let truth = exponential_truth(0.5);
        let a = bootstrap_bias_mse(&g, &truth).unwrap();
        let b = bootstrap_bias_mse(&g, &truth).unwrap();
        assert_eq!(a, b);
        for r in &a.rows {
            assert!(r.mse.unwrap() >= r.bias.unwrap().powi(2) - 1e-12);
        }
        let p = monte_carlo_parametric(&g, &truth).unwrap();
        assert_eq!(p, monte_carlo_parametric(&g, &truth).unwrap());
    }

    #[test]
    fn csv_layout() {
        let t = ReportTable {
            rows: vec![ReportRow {
                beta: 1.2,
                t: 0.1,
                n: 30,
                truth: 1.0,
                bias: Some(0.5),
                mse: None,
                estimate_mean: Some(1.5),
                failures: 1,
            }],
        };
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "beta,t,n,bias,mse\n1.2,0.1,30,0.5,\n");
    }
}
