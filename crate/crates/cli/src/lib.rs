//! The `wigf` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use wigf_core::estimate::{
    self, Bandwidth, ExperimentGrid, GridSource, Kde, ReportTable, Resampling,
};
use wigf_core::gof::{self, Fixture, GofModel};
use wigf_core::igf::{self, IgfQuery, Method};
use wigf_core::residual::{self, ResidualQuery};
use wigf_core::rigf::{self, RigfQuery};
use wigf_core::transforms::{self, IdentityReport};
use wigf_core::{Distribution, Error, MonotoneMap, QuadConfig, Sample, SampleSource, WeightFn};

mod ingest;
pub use ingest::ingest_csv;

pub const EXIT_OK: i32 = 0;
/// A verification ran but its check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else if let Error::Io(m) = e {
            CliError::Io(m)
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "wigf",
    version,
    about = "Weighted information generating functions: evaluation, identities, estimation and model fitting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Relative tolerance of every quadrature (for `verify`: the identity tolerance)
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Output format (default json; `datasets` defaults to csv)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the result here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed for sampling and resampling
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weighted generating function of one model
    Eval(EvalArgs),
    /// Relative generating function and divergences of two models
    Rigf(RigfArgs),
    /// Residual (age-conditioned) versions
    Residual(ResidualArgs),
    /// Check one of the transform identities
    Verify(VerifyArgs),
    /// Estimate the residual function (w = x) from data
    #[command(subcommand)]
    Estimate(EstimateCmd),
    /// Bias and MSE of the estimators by simulation
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// Fit models by maximum likelihood and rank them by AIC
    Gof(GofArgs),
    /// Emit a bundled data set
    Datasets(DatasetArgs),
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    #[arg(long)]
    model: String,
    #[arg(long, default_value = "one")]
    weight: String,
    #[arg(long)]
    beta: f64,
    /// closed | quad | both (default: both when a closed form is catalogued)
    #[arg(long)]
    method: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum RigfMeasure {
    Rigf,
    Kl,
    Jdiv,
    Cie,
}

#[derive(Args, Debug, Serialize)]
struct RigfArgs {
    #[arg(long)]
    model_f: String,
    #[arg(long)]
    model_g: String,
    #[arg(long, default_value = "one")]
    weight: String,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_enum, default_value_t = RigfMeasure::Rigf)]
    measure: RigfMeasure,
    #[arg(long)]
    method: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ResidualMeasure {
    Igf,
    Rigf,
    Kl,
    Bound,
}

#[derive(Args, Debug, Serialize)]
struct ResidualArgs {
    #[arg(long)]
    model: String,
    /// Second model, for `rigf` and `kl`
    #[arg(long)]
    model_g: Option<String>,
    #[arg(long, default_value = "x")]
    weight: String,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    t: f64,
    #[arg(long, value_enum, default_value_t = ResidualMeasure::Igf)]
    measure: ResidualMeasure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Identity {
    EscortIgf,
    GenEscort,
    MixtureIgf,
    MixtureRigf,
    CrossEnergy,
    HazardExpectation,
    Equilibrium,
    PhHazard,
    ResidualTransform,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    identity: Identity,
    #[arg(long, alias = "model-f")]
    model: String,
    #[arg(long)]
    model_g: Option<String>,
    #[arg(long, default_value = "one")]
    weight: String,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    #[arg(long, default_value_t = 1.5)]
    gamma: f64,
    #[arg(long, default_value_t = 1)]
    component: usize,
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    /// Increasing map for `residual-transform`
    #[arg(long, default_value = "affine:a=2,b=1")]
    map: String,
}

#[derive(Args, Debug, Serialize)]
struct DataSource {
    /// CSV with one value per row
    #[arg(long, group = "source")]
    input: Option<PathBuf>,
    /// Generate a sample from this model
    #[arg(long, group = "source")]
    gen: Option<String>,
    /// A bundled data set: bladder | relief
    #[arg(long, group = "source")]
    dataset: Option<String>,
    /// Size of the generated sample
    #[arg(long, default_value_t = 100)]
    n: usize,
}

#[derive(Args, Debug, Serialize)]
struct EstimateArgs {
    #[command(flatten)]
    source: DataSource,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.2, 1.7, 2.5])]
    beta: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.2, 0.5, 0.7, 0.9])]
    t: Vec<f64>,
    /// Positive number or `silverman` (default: the data set's value, else silverman)
    #[arg(long)]
    bandwidth: Option<String>,
    /// Bootstrap resamples scored against the full-sample estimate (0 = none)
    #[arg(long, default_value_t = 0)]
    bootstrap: usize,
}

#[derive(Subcommand, Debug)]
enum EstimateCmd {
    /// Kernel estimator
    Np(EstimateArgs),
    /// Exponential plug-in estimator
    Mle(EstimateArgs),
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[arg(long, default_value = "exp:lambda=0.5")]
    model: String,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.2, 1.7, 2.5])]
    beta: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.2, 0.5, 0.7, 0.9])]
    t: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![30, 50, 70, 100])]
    n: Vec<usize>,
    #[arg(long, default_value_t = 600)]
    bootstrap: usize,
    /// Base samples per size (default 20 for np, 250 for mle)
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long, default_value = "silverman")]
    bandwidth: String,
    /// Score every base sample once instead of resampling it
    #[arg(long)]
    no_resample: bool,
}

#[derive(Subcommand, Debug)]
enum SimulateCmd {
    /// Bootstrap bias and MSE of the kernel estimator
    Np(SimulateArgs),
    /// Monte Carlo bias and MSE of the exponential plug-in estimator
    Mle(SimulateArgs),
}

#[derive(Args, Debug, Serialize)]
struct GofArgs {
    #[command(flatten)]
    source: DataSource,
    #[arg(long, value_delimiter = ',', default_values_t = vec!["exp".to_string(), "gumbel2".to_string()])]
    models: Vec<String>,
}

#[derive(Args, Debug, Serialize)]
struct DatasetArgs {
    #[arg(long)]
    name: String,
}

struct Ctx {
    quad: QuadConfig,
    seed: u64,
    tol: Option<f64>,
}

/// Output of one command: result fields, resolved configuration, and an
/// optional table for CSV output.
struct Outcome {
    body: Map<String, Value>,
    config: Map<String, Value>,
    csv: Option<String>,
    code: i32,
}

impl Outcome {
    fn new(body: Value, config: Value) -> Self {
        let as_map = |v: Value| match v {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("value".into(), other);
                m
            }
        };
        Outcome {
            body: as_map(body),
            config: as_map(config),
            csv: None,
            code: EXIT_OK,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> CliResult<T> {
    s.parse::<T>().map_err(CliError::from)
}

fn parse_method(m: &Option<String>) -> CliResult<Option<Method>> {
    m.as_deref().map(parse::<Method>).transpose()
}

fn need_beta(b: Option<f64>, what: &str) -> CliResult<f64> {
    b.ok_or_else(|| CliError::Usage(format!("--beta is required for {what}")))
}

/// Runs `wigf` with the given arguments (including the program name),
/// writing the result to `--out` or `out` and diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli) {
        Ok(outcome) => match emit(&cli, outcome, out) {
            Ok(code) => code,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                e.code()
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn emit(cli: &Cli, o: Outcome, out: &mut dyn Write) -> CliResult<i32> {
    let default = match cli.command {
        Command::Datasets(_) => Format::Csv,
        _ => Format::Json,
    };
    let format = cli.format.unwrap_or(default);
    let text = match format {
        Format::Json => {
            let mut m = o.body;
            m.insert("config".into(), Value::Object(o.config));
            let mut s = serde_json::to_string(&Value::Object(m)).expect("json");
            s.push('\n');
            s
        }
        Format::Csv => match o.csv {
            Some(s) => s,
            None => scalar_csv(&o.body),
        },
    };
    match &cli.out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string()))?,
    }
    Ok(o.code)
}

/// One-row CSV of the scalar fields of a result.
fn scalar_csv(body: &Map<String, Value>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let cols: Vec<(&String, String)> = body
        .iter()
        .filter_map(|(k, v)| match v {
            Value::Number(n) => Some((k, n.to_string())),
            Value::Bool(b) => Some((k, b.to_string())),
            Value::String(s) => Some((k, s.clone())),
            Value::Null => Some((k, String::new())),
            _ => None,
        })
        .collect();
    w.write_record(cols.iter().map(|c| c.0.as_str())).expect("csv");
    w.write_record(cols.iter().map(|c| c.1.as_str())).expect("csv");
    String::from_utf8(w.into_inner().expect("csv")).expect("utf8")
}

fn table_csv(t: &ReportTable) -> String {
    let mut buf = Vec::new();
    t.write_csv(&mut buf).expect("in-memory csv");
    String::from_utf8(buf).expect("utf8")
}

fn execute(cli: &Cli) -> CliResult<Outcome> {
    let mut quad = QuadConfig::default();
    let mut identity_tol = None;
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(CliError::Usage(format!("--tol must lie in (0, 1), got {tol}")));
        }
        if matches!(cli.command, Command::Verify(_)) {
            identity_tol = Some(tol);
            quad = QuadConfig::with_rel_tol((tol * 1e-3).min(quad.rel_tol));
        } else {
            quad = QuadConfig::with_rel_tol(tol);
        }
    }
    let ctx = Ctx {
        quad,
        seed: cli.seed,
        tol: identity_tol,
    };
    let (name, args, mut o) = match &cli.command {
        Command::Eval(a) => ("eval", to_value(a), eval(&ctx, a)?),
        Command::Rigf(a) => ("rigf", to_value(a), rigf_cmd(&ctx, a)?),
        Command::Residual(a) => ("residual", to_value(a), residual_cmd(&ctx, a)?),
        Command::Verify(a) => ("verify", to_value(a), verify(&ctx, a)?),
        Command::Estimate(EstimateCmd::Np(a)) => ("estimate np", to_value(a), estimate_np(&ctx, a)?),
        Command::Estimate(EstimateCmd::Mle(a)) => ("estimate mle", to_value(a), estimate_mle(&ctx, a)?),
        Command::Simulate(SimulateCmd::Np(a)) => ("simulate np", to_value(a), simulate(&ctx, a, false)?),
        Command::Simulate(SimulateCmd::Mle(a)) => ("simulate mle", to_value(a), simulate(&ctx, a, true)?),
        Command::Gof(a) => ("gof", to_value(a), gof_cmd(&ctx, a)?),
        Command::Datasets(a) => ("datasets", to_value(a), datasets(a)?),
    };
    let mut config = Map::new();
    config.insert("command".into(), json!(name));
    config.insert("args".into(), args);
    config.insert("seed".into(), json!(cli.seed));
    config.insert("quad".into(), to_value(&ctx.quad));
    config.append(&mut o.config);
    o.config = config;
    Ok(o)
}

fn eval(ctx: &Ctx, a: &EvalArgs) -> CliResult<Outcome> {
    let d: Distribution = parse(&a.model)?;
    let w: WeightFn = parse(&a.weight)?;
    let q = IgfQuery::new(d, w, a.beta)?.with_quad(ctx.quad);
    let method = match parse_method(&a.method)? {
        Some(m) => m,
        None => match igf::gwigf_closed(&q.dist, &q.weight, q.beta) {
            Ok(_) => Method::Both,
            Err(Error::NoClosedForm(_)) => Method::Quad,
            Err(e) => return Err(e.into()),
        },
    };
    let ev = igf::evaluate(&q, method)?;
    Ok(Outcome::new(to_value(&ev), json!({ "method": method })))
}

fn rigf_cmd(ctx: &Ctx, a: &RigfArgs) -> CliResult<Outcome> {
    let f: Distribution = parse(&a.model_f)?;
    let g: Distribution = parse(&a.model_g)?;
    let w: WeightFn = parse(&a.weight)?;
    let body = match a.measure {
        RigfMeasure::Rigf => {
            let q = RigfQuery::new(f, g, w, need_beta(a.beta, "rigf")?)?.with_quad(ctx.quad);
            let method = match parse_method(&a.method)? {
                Some(m) => m,
                None => match rigf::gwrigf_closed(&q.f, &q.g, &q.weight, q.beta) {
                    Ok(_) => Method::Both,
                    Err(Error::NoClosedForm(_)) => Method::Quad,
                    Err(e) => return Err(e.into()),
                },
            };
            to_value(&rigf::evaluate_rigf(&q, method)?)
        }
        RigfMeasure::Kl => json!({ "value": rigf::weighted_kl(&f, &g, &w, &ctx.quad)? }),
        RigfMeasure::Jdiv => json!({ "value": rigf::weighted_j_divergence(&f, &g, &w, &ctx.quad)? }),
        RigfMeasure::Cie => {
            let b = need_beta(a.beta, "cie")?;
            json!({ "value": rigf::cross_informational_energy(&f, &g, &w, b, &ctx.quad)? })
        }
    };
    Ok(Outcome::new(body, json!({})))
}

fn residual_cmd(ctx: &Ctx, a: &ResidualArgs) -> CliResult<Outcome> {
    let d: Distribution = parse(&a.model)?;
    let w: WeightFn = parse(&a.weight)?;
    let second = || -> CliResult<Distribution> {
        a.model_g
            .as_deref()
            .ok_or_else(|| CliError::Usage("--model-g is required for this measure".into()))
            .and_then(parse)
    };
    let body = match a.measure {
        ResidualMeasure::Igf => {
            let q = ResidualQuery::new(d, w, need_beta(a.beta, "igf")?, a.t)?.with_quad(ctx.quad);
            let value = residual::residual_gwigf(&q)?;
            let mut m = json!({ "value": value });
            match residual::residual_gwigf_closed(&q.dist, &q.weight, q.beta, q.t) {
                Ok(c) => {
                    m["closed"] = json!(c.value);
                    m["paper_flagged"] = json!(c.paper_flagged);
                    if c.paper_flagged {
                        m["printed"] = json!(c.printed);
                    }
                }
                Err(Error::NoClosedForm(_)) => {}
                Err(e) => return Err(e.into()),
            }
            m
        }
        ResidualMeasure::Rigf => {
            let b = need_beta(a.beta, "rigf")?;
            igf::check_public_beta(b)?;
            json!({ "value": residual::residual_gwrigf(&d, &second()?, &w, b, a.t, &ctx.quad)? })
        }
        ResidualMeasure::Kl => {
            json!({ "value": residual::residual_weighted_kl(&d, &second()?, &w, a.t, &ctx.quad)? })
        }
        ResidualMeasure::Bound => {
            let q = ResidualQuery::new(d, w, need_beta(a.beta, "bound")?, a.t)?.with_quad(ctx.quad);
            to_value(&residual::residual_bound(&q)?)
        }
    };
    Ok(Outcome::new(body, json!({})))
}

fn verify(ctx: &Ctx, a: &VerifyArgs) -> CliResult<Outcome> {
    let f: Distribution = parse(&a.model)?;
    let w: WeightFn = parse(&a.weight)?;
    let g = || -> CliResult<Distribution> {
        a.model_g
            .as_deref()
            .ok_or_else(|| CliError::Usage("--model-g is required for this identity".into()))
            .and_then(parse)
    };
    let q = &ctx.quad;
    let rep: IdentityReport = match a.identity {
        Identity::EscortIgf => transforms::verify_escort_igf(&f, &w, a.alpha, a.beta, q)?,
        Identity::GenEscort => transforms::verify_gen_escort_igf(&f, &g()?, &w, a.alpha, a.beta, q)?,
        Identity::MixtureIgf => transforms::verify_mixture_igf(&f, &g()?, a.r, a.gamma, &w, a.beta, q)?,
        Identity::MixtureRigf => {
            transforms::verify_mixture_rigf(&f, &g()?, a.r, a.gamma, &w, a.beta, a.component, q)?
        }
        Identity::CrossEnergy => transforms::verify_cross_energy_escort(&f, &g()?, &w, a.alpha, a.beta, q)?,
        Identity::HazardExpectation => residual::verify_hazard_expectation(&f, &w, a.beta, q)?,
        Identity::Equilibrium => residual::verify_equilibrium_identity(&f, &w, a.beta, a.t, q)?,
        Identity::PhHazard => residual::verify_ph_hazard_expectation(&f, &w, a.beta, a.t, q)?,
        Identity::ResidualTransform => {
            let map: MonotoneMap = parse(&a.map)?;
            residual::verify_residual_transform(&f, &g()?, &w, map, a.beta, a.t, q)?
        }
    };
    let rep = match ctx.tol {
        Some(t) => rep.with_tolerance(t),
        None => rep,
    };
    let mut o = Outcome::new(to_value(&rep), json!({ "identity_tol": rep.tolerance }));
    let bound_ok = rep.bound_satisfied.unwrap_or(true);
    if !(rep.passed && bound_ok) {
        o.code = EXIT_CHECK_FAILED;
    }
    Ok(o)
}

/// Loaded sample, its description, and the data set when bundled.
fn load(ctx: &Ctx, s: &DataSource) -> CliResult<(Sample, Option<Fixture>)> {
    match (&s.input, &s.gen, &s.dataset) {
        (Some(p), None, None) => Ok((ingest_csv(p)?, None)),
        (None, Some(spec), None) => {
            let d: Distribution = parse(spec)?;
            let values = d.sample(s.n, ctx.seed)?.values().to_vec();
            let sample = Sample::from_parts(
                values,
                SampleSource::Generated {
                    model: d.to_string(),
                    seed: ctx.seed,
                    n: s.n,
                },
            )?;
            Ok((sample, None))
        }
        (None, None, Some(name)) => {
            let f: Fixture = parse(name)?;
            Ok((gof::load_fixture(f), Some(f)))
        }
        _ => Err(CliError::Usage("give exactly one of --input, --gen, --dataset".into())),
    }
}

fn resolve_bandwidth(a: &EstimateArgs, fixture: Option<Fixture>) -> CliResult<Bandwidth> {
    match (&a.bandwidth, fixture) {
        (Some(b), _) => parse(b),
        (None, Some(f)) => Ok(Bandwidth::Fixed(f.bandwidth())),
        (None, None) => Ok(Bandwidth::Silverman),
    }
}

#[derive(Serialize)]
struct PointEstimate {
    beta: f64,
    t: f64,
    estimate: f64,
}

fn points_csv(points: &[PointEstimate]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in points {
        w.serialize(p).expect("csv");
    }
    String::from_utf8(w.into_inner().expect("csv")).expect("utf8")
}

fn estimate_np(ctx: &Ctx, a: &EstimateArgs) -> CliResult<Outcome> {
    let (sample, fixture) = load(ctx, &a.source)?;
    let bw = resolve_bandwidth(a, fixture)?;
    let b = bw.resolve(sample.values())?;
    let kde = Kde::new(sample.values(), b)?;
    let mut points = Vec::new();
    for &beta in &a.beta {
        for &t in &a.t {
            let estimate = estimate::np_residual_gwigf(&kde, beta, t)?;
            points.push(PointEstimate { beta, t, estimate });
        }
    }
    let mut body = json!({ "n": sample.len(), "estimates": points });
    let mut csv = Some(points_csv(&points));
    if a.bootstrap > 0 {
        let grid = ExperimentGrid {
            betas: a.beta.clone(),
            ts: a.t.clone(),
            ns: vec![sample.len()],
            replications: 1,
            bootstrap: a.bootstrap,
            seed: ctx.seed,
            source: GridSource::Fixed {
                values: sample.values().to_vec(),
            },
            bandwidth: Bandwidth::Fixed(b),
            resampling: Resampling::WithReplacement,
        };
        let table = estimate::bootstrap_fixed(&grid)?;
        csv = Some(table_csv(&table));
        body["rows"] = to_value(&table.rows);
    }
    let mut o = Outcome::new(
        body,
        json!({ "bandwidth_rule": bw, "bandwidth": b, "source": sample.source(), "bootstrap": a.bootstrap }),
    );
    o.csv = csv;
    Ok(o)
}

fn estimate_mle(ctx: &Ctx, a: &EstimateArgs) -> CliResult<Outcome> {
    let (sample, _) = load(ctx, &a.source)?;
    if a.bandwidth.is_some() || a.bootstrap > 0 {
        return Err(CliError::Usage(
            "--bandwidth and --bootstrap apply to the kernel estimator only".into(),
        ));
    }
    let lambda = estimate::mle_rate_exponential(sample.values())?;
    let mut points = Vec::new();
    for &beta in &a.beta {
        for &t in &a.t {
            let estimate = estimate::parametric_residual_gwigf_exp(lambda, beta, t)?;
            points.push(PointEstimate { beta, t, estimate });
        }
    }
    let mut o = Outcome::new(
        json!({ "n": sample.len(), "lambda": lambda, "estimates": points }),
        json!({ "source": sample.source() }),
    );
    o.csv = Some(points_csv(&points));
    Ok(o)
}

fn simulate(ctx: &Ctx, a: &SimulateArgs, parametric: bool) -> CliResult<Outcome> {
    let model: Distribution = parse(&a.model)?;
    let bandwidth: Bandwidth = parse(&a.bandwidth)?;
    let replications = a.replications.unwrap_or(if parametric { 250 } else { 20 });
    let grid = ExperimentGrid {
        betas: a.beta.clone(),
        ts: a.t.clone(),
        ns: a.n.clone(),
        replications,
        bootstrap: if parametric { 1 } else { a.bootstrap },
        seed: ctx.seed,
        source: GridSource::Generated { model: model.clone() },
        bandwidth,
        resampling: if a.no_resample {
            Resampling::Identity
        } else {
            Resampling::WithReplacement
        },
    };
    grid.validate()?;
    let rate = match model {
        Distribution::Exponential { rate } => Some(rate),
        _ => None,
    };
    if parametric && rate.is_none() {
        return Err(CliError::Usage("the plug-in estimator needs an exponential model".into()));
    }
    let mut truths = Vec::new();
    for &b in &a.beta {
        for &t in &a.t {
            let v = match rate {
                Some(l) => estimate::exponential_truth(l)(b, t),
                None => residual::residual_gwigf_ext(&model, &WeightFn::Identity, b, t, &ctx.quad)?,
            };
            truths.push((b, t, v));
        }
    }
    let truth = |b: f64, t: f64| {
        truths
            .iter()
            .find(|p| p.0 == b && p.1 == t)
            .map(|p| p.2)
            .unwrap_or(f64::NAN)
    };
    let table = if parametric {
        estimate::monte_carlo_parametric(&grid, truth)?
    } else {
        estimate::bootstrap_bias_mse(&grid, truth)?
    };
    let mut o = Outcome::new(json!({ "rows": table.rows }), to_value(&grid));
    o.config.insert("replications".into(), json!(replications));
    o.csv = Some(table_csv(&table));
    Ok(o)
}

fn gof_cmd(ctx: &Ctx, a: &GofArgs) -> CliResult<Outcome> {
    let (sample, _) = load(ctx, &a.source)?;
    let models = a
        .models
        .iter()
        .map(|m| parse::<GofModel>(m))
        .collect::<CliResult<Vec<_>>>()?;
    let rep = gof::gof_report(&sample, &models)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "params", "neg_log_l", "aic", "aicc", "bic"]).expect("csv");
    for r in &rep.rows {
        let params = r
            .fit
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        let c = &r.criteria;
        w.write_record([
            r.fit.model.id().to_string(),
            params,
            c.neg_log_l.to_string(),
            c.aic.to_string(),
            c.aicc.map(|v| v.to_string()).unwrap_or_default(),
            c.bic.to_string(),
        ])
        .expect("csv");
    }
    let mut o = Outcome::new(
        json!({ "n": sample.len(), "rows": rep.rows, "failures": rep.failures }),
        json!({ "source": sample.source() }),
    );
    o.csv = Some(String::from_utf8(w.into_inner().expect("csv")).expect("utf8"));
    Ok(o)
}

fn datasets(a: &DatasetArgs) -> CliResult<Outcome> {
    let f: Fixture = parse(&a.name)?;
    let values = f.values();
    let mut s = String::from("value\n");
    for v in values {
        s.push_str(&format!("{v}\n"));
    }
    let mut o = Outcome::new(json!({ "name": f.name(), "values": values }), json!({}));
    o.csv = Some(s);
    Ok(o)
}
