//! Command-line surface: parse spec files, dispatch to the engine, emit
//! machine-readable reports.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on numeric failure
//! (divergence flags, failed verification suites).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use stein_bounds::bayes::{self, Prior, SamplingModel};
use stein_bounds::bounds::{wasserstein_bounds, BoundsResult};
use stein_bounds::oracle;
use stein_bounds::report::{BoundsReport, OracleReport, SuiteReport};
use stein_bounds::schema::{BayesSpec, DistributionSpec, ModelSpec, PriorSpec};
use stein_bounds::stein::SteinKernel;
use stein_bounds::{suites, Distribution, QuadratureConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

/// Environment variable naming a JSON file with default config values.
pub const CONFIG_ENV: &str = "STEIN_BOUNDS_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "stein-bounds", version = stein_bounds::VERSION, about = "Wasserstein-1 bounds between nested densities via Stein kernels")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: ConfigOverrides,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct ConfigOverrides {
    /// Absolute quadrature tolerance.
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    /// Seed for randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Wasserstein bound pair for two distribution specs.
    Bound {
        /// JSON file with the base distribution P1.
        #[arg(long)]
        p1: PathBuf,
        /// JSON file with the target distribution P2.
        #[arg(long)]
        p2: PathBuf,
    },
    /// Ground-truth Wasserstein distance from the cdf/quantile integrals.
    Oracle {
        #[arg(long)]
        p1: PathBuf,
        #[arg(long)]
        p2: PathBuf,
    },
    /// Prior-impact bounds for a Bayes spec (model + prior).
    Bayes {
        /// JSON file with {"model": ..., "prior": ...}.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Stein kernel over a quantile grid, as columns x, tau, pdf.
    Kernel {
        /// JSON file with the distribution spec.
        #[arg(long)]
        p1: PathBuf,
        /// Number of grid points.
        #[arg(long, default_value_t = 257)]
        grid: usize,
    },
    /// Run the verification suites.
    Verify {
        /// Which suite: sandwich, kernel, gh, oracle or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Number of random pairs for the randomized suites.
        #[arg(long, default_value_t = 50)]
        pairs: usize,
    },
    /// Sweep one model/prior parameter of a Bayes spec, emitting one row per
    /// value.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Parameter to vary: n, xbar, y, sigma, mu, delta, alpha, beta, lambda.
        #[arg(long)]
        param: String,
        /// Comma-separated list of values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Evaluate sweep points on a thread pool (output order unchanged).
        #[arg(long)]
        parallel: bool,
    },
}

/// Entry point used by both the binary and the tests.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path as well.
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn resolve_config(overrides: &ConfigOverrides) -> anyhow::Result<QuadratureConfig> {
    let mut cfg = match std::env::var_os(CONFIG_ENV) {
        Some(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| anyhow::anyhow!("cannot read {CONFIG_ENV} file {path:?}: {e}"))?;
            serde_json::from_str(&text)
                .map_err(|e| anyhow::anyhow!("invalid config in {path:?}: {e}"))?
        }
        None => QuadratureConfig::default(),
    };
    if let Some(v) = overrides.abs_tol {
        cfg.abs_tol = v;
    }
    if let Some(v) = overrides.rel_tol {
        cfg.rel_tol = v;
    }
    if let Some(v) = overrides.seed {
        cfg.seed = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_distribution(path: &Path, cfg: &QuadratureConfig) -> anyhow::Result<Distribution> {
    let text = fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    Ok(DistributionSpec::from_json(&text)?.build(cfg)?)
}

fn emit(out: &Option<PathBuf>, payload: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, payload)
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display())),
        None => {
            println!("{payload}");
            Ok(())
        }
    }
}

fn json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}

/// Full-precision decimal formatting (17 significant digits).
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn bounds_numeric_failure(r: &BoundsResult) -> bool {
    !r.upper.is_finite() || !r.lower.is_finite()
}

fn bounds_csv(r: &BoundsReport) -> String {
    let mut s = String::from("lower,upper,exact,method\n");
    s.push_str(&format!(
        "{},{},{},{}\n",
        fmt17(r.lower),
        r.upper.map(fmt17).unwrap_or_else(|| "inf".into()),
        r.exact,
        serde_json::to_value(r.method).unwrap().as_str().unwrap()
    ));
    s
}

/// Bayes report: the engine bounds plus the matching closed form when the
/// model/prior pair has one.
#[derive(Debug, Serialize, Deserialize)]
pub struct BayesReport {
    pub lower: f64,
    pub upper: Option<f64>,
    pub upper_finite: bool,
    pub exact: bool,
    /// The distance itself, when the engine result is exact.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub method: stein_bounds::bounds::Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedFormBlock>,
    pub conditions: stein_bounds::bounds::ConditionReport,
    pub diagnostics: stein_bounds::bounds::Diagnostics,
    pub config: QuadratureConfig,
    pub version: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClosedFormBlock {
    pub kind: String,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

fn closed_form_for(model: &SamplingModel, prior: &Prior) -> Option<(ClosedFormBlock, BoundsResult)> {
    let (kind, result) = match (model, prior) {
        (SamplingModel::NormalKnownVariance { sigma, n, xbar }, Prior::Normal { mu, delta }) => (
            "normal_normal",
            bayes::normal_normal_closed_form(*sigma, *n, *xbar, *mu, *delta).ok()?,
        ),
        (SamplingModel::Binomial { n, y }, Prior::Beta { alpha, beta }) => (
            "binomial_beta",
            bayes::binomial_beta_closed_form(*n, *y, *alpha, *beta).ok()?,
        ),
        (SamplingModel::Binomial { n, y }, Prior::Jeffreys) => {
            ("binomial_jeffreys", bayes::binomial_jeffreys_closed_form(*n, *y).ok()?)
        }
        (SamplingModel::Poisson { n, xbar }, Prior::Exponential { lambda }) => (
            "poisson_exponential",
            bayes::poisson_exponential_exact(*n, *xbar, *lambda).ok()?,
        ),
        _ => return None,
    };
    Some((
        ClosedFormBlock {
            kind: kind.to_string(),
            lower: result.lower,
            upper: result.upper,
            exact: result.exact,
        },
        result,
    ))
}

fn run_bayes(spec_path: &Path, cfg: &QuadratureConfig, format: Format, out: &Option<PathBuf>) -> anyhow::Result<i32> {
    let text = fs::read_to_string(spec_path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", spec_path.display()))?;
    let spec = BayesSpec::from_json(&text)?;
    let model = spec.model.build();
    let prior = spec.prior.build()?;
    let pair = bayes::build_posteriors(&model, &prior, cfg)?;
    let engine = bayes::prior_impact_bounds(&pair, cfg)?;
    let closed = closed_form_for(&model, &prior);
    let report = BayesReport {
        lower: engine.lower,
        upper: engine.upper.is_finite().then_some(engine.upper),
        upper_finite: engine.upper.is_finite(),
        exact: engine.exact,
        value: engine.exact.then(|| engine.value()),
        method: engine.method,
        closed_form: closed.map(|(block, _)| block),
        conditions: engine.conditions.clone(),
        diagnostics: engine.diagnostics.clone(),
        config: cfg.clone(),
        version: stein_bounds::VERSION.to_string(),
    };
    let payload = match format {
        Format::Json => json_pretty(&report),
        Format::Csv => {
            let mut s = String::from("lower,upper,exact,value\n");
            s.push_str(&format!(
                "{},{},{},{}\n",
                fmt17(report.lower),
                report.upper.map(fmt17).unwrap_or_else(|| "inf".into()),
                report.exact,
                report.value.map(fmt17).unwrap_or_default()
            ));
            s
        }
    };
    emit(out, &payload)?;
    Ok(if bounds_numeric_failure(&engine) { EXIT_NUMERIC } else { EXIT_OK })
}

fn run_sweep(
    spec_path: &Path,
    param: &str,
    values: &[f64],
    parallel: bool,
    cfg: &QuadratureConfig,
    out: &Option<PathBuf>,
) -> anyhow::Result<i32> {
    let text = fs::read_to_string(spec_path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", spec_path.display()))?;
    let spec = BayesSpec::from_json(&text)?;
    if values.is_empty() {
        anyhow::bail!("sweep requires at least one value");
    }

    let evaluate = |v: f64| -> anyhow::Result<BoundsResult> {
        let point = apply_param(&spec, param, v)?;
        let model = point.model.build();
        let prior = point.prior.build()?;
        let pair = bayes::build_posteriors(&model, &prior, cfg)?;
        Ok(bayes::prior_impact_bounds(&pair, cfg)?)
    };

    let results: Vec<anyhow::Result<BoundsResult>> = if parallel {
        values.par_iter().map(|v| evaluate(*v)).collect()
    } else {
        values.iter().map(|v| evaluate(*v)).collect()
    };

    let mut csv = String::from("param,value,lower,upper,exact,method\n");
    let mut failed = false;
    for (v, r) in values.iter().zip(results) {
        match r {
            Ok(b) => {
                failed |= bounds_numeric_failure(&b);
                csv.push_str(&format!(
                    "{param},{},{},{},{},{}\n",
                    fmt17(*v),
                    fmt17(b.lower),
                    if b.upper.is_finite() { fmt17(b.upper) } else { "inf".into() },
                    b.exact,
                    serde_json::to_value(b.method).unwrap().as_str().unwrap()
                ));
            }
            Err(e) => anyhow::bail!("sweep point {param} = {v}: {e}"),
        }
    }
    emit(out, &csv)?;
    Ok(if failed { EXIT_NUMERIC } else { EXIT_OK })
}

/// Returns a copy of the Bayes input spec with one named parameter replaced.
fn apply_param(spec: &BayesSpec, param: &str, value: f64) -> anyhow::Result<BayesSpec> {
    let mut spec = spec.clone();
    let as_count = |v: f64| -> anyhow::Result<u64> {
        if v.fract().abs() > 1e-9 || v < 0.0 {
            anyhow::bail!("parameter value {v} must be a nonnegative integer");
        }
        Ok(v.round() as u64)
    };
    let mut matched = true;
    match (&mut spec.model, param) {
        (ModelSpec::Normal { n, .. }, "n") => *n = as_count(value)?,
        (ModelSpec::Normal { xbar, .. }, "xbar") => *xbar = value,
        (ModelSpec::Normal { sigma, .. }, "sigma") => *sigma = value,
        (ModelSpec::Binomial { n, .. }, "n") => *n = as_count(value)?,
        (ModelSpec::Binomial { y, .. }, "y") => *y = as_count(value)?,
        (ModelSpec::Poisson { n, .. }, "n") => *n = as_count(value)?,
        (ModelSpec::Poisson { xbar, .. }, "xbar") => *xbar = value,
        _ => matched = false,
    }
    if matched {
        return Ok(spec);
    }
    match (&mut spec.prior, param) {
        (PriorSpec::Normal { mu, .. }, "mu") => *mu = value,
        (PriorSpec::Normal { delta, .. }, "delta") => *delta = value,
        (PriorSpec::Beta { alpha, .. }, "alpha") => *alpha = value,
        (PriorSpec::Beta { beta, .. }, "beta") => *beta = value,
        (PriorSpec::Exponential { lambda }, "lambda") => *lambda = value,
        _ => anyhow::bail!("parameter '{param}' does not name a field of this spec"),
    }
    Ok(spec)
}

fn run_verify(suite: &str, pairs: usize, cfg: &QuadratureConfig, out: &Option<PathBuf>) -> anyhow::Result<i32> {
    let reports: Vec<SuiteReport> = match suite {
        "all" => suites::run_all(pairs, cfg),
        "sandwich" => vec![suites::run_sandwich_suite(pairs, cfg)],
        "kernel" => vec![suites::run_kernel_suite(cfg)],
        "gh" => vec![suites::run_gh_suite(cfg)],
        "oracle" => vec![suites::run_oracle_suite(pairs, cfg)],
        other => anyhow::bail!("unknown suite '{other}' (expected all, sandwich, kernel, gh, oracle)"),
    };
    for r in &reports {
        eprintln!("suite {:<10} {} ({} cases, {} failures)", r.suite, if r.passed { "PASS" } else { "FAIL" }, r.cases, r.failures.len());
    }
    #[derive(Serialize)]
    struct VerifyReport<'a> {
        suites: &'a [SuiteReport],
        passed: bool,
        config: &'a QuadratureConfig,
        version: &'static str,
    }
    let passed = reports.iter().all(|r| r.passed);
    let payload = json_pretty(&VerifyReport {
        suites: &reports,
        passed,
        config: cfg,
        version: stein_bounds::VERSION,
    });
    emit(out, &payload)?;
    Ok(if passed { EXIT_OK } else { EXIT_NUMERIC })
}

fn run_kernel(p1: &Path, grid: usize, cfg: &QuadratureConfig, format: Format, out: &Option<PathBuf>) -> anyhow::Result<i32> {
    let d = read_distribution(p1, cfg)?;
    let kernel = SteinKernel::new(&d, cfg)?;
    let n = grid.max(2);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let u = 1e-4 + (1.0 - 2e-4) * i as f64 / (n - 1) as f64;
        let x = d.quantile(u)?;
        rows.push((x, kernel.eval(x), d.pdf(x)));
    }
    let payload = match format {
        Format::Csv => {
            let mut s = String::from("x,tau,pdf\n");
            for (x, tau, pdf) in &rows {
                s.push_str(&format!("{},{},{}\n", fmt17(*x), fmt17(*tau), fmt17(*pdf)));
            }
            s
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                x: f64,
                tau: f64,
                pdf: f64,
            }
            #[derive(Serialize)]
            struct KernelReport {
                rows: Vec<Row>,
                config: QuadratureConfig,
                version: String,
            }
            json_pretty(&KernelReport {
                rows: rows.into_iter().map(|(x, tau, pdf)| Row { x, tau, pdf }).collect(),
                config: cfg.clone(),
                version: stein_bounds::VERSION.to_string(),
            })
        }
    };
    emit(out, &payload)?;
    Ok(EXIT_OK)
}

fn execute(cli: Cli) -> anyhow::Result<i32> {
    let cfg = resolve_config(&cli.overrides)?;
    match &cli.command {
        Command::Bound { p1, p2 } => {
            let d1 = read_distribution(p1, &cfg)?;
            let d2 = read_distribution(p2, &cfg)?;
            let result = wasserstein_bounds(&d1, &d2, &cfg)?;
            let report = BoundsReport::new(&result, &cfg);
            let payload = match cli.format {
                Format::Json => json_pretty(&report),
                Format::Csv => bounds_csv(&report),
            };
            emit(&cli.out, &payload)?;
            Ok(if bounds_numeric_failure(&result) { EXIT_NUMERIC } else { EXIT_OK })
        }
        Command::Oracle { p1, p2 } => {
            let d1 = read_distribution(p1, &cfg)?;
            let d2 = read_distribution(p2, &cfg)?;
            let result = oracle::oracle(&d1, &d2, &cfg);
            let report = OracleReport::new(&result, &cfg);
            let payload = match cli.format {
                Format::Json => json_pretty(&report),
                Format::Csv => {
                    let mut s = String::from("value,value_cdf,value_quantile,agreement,converged\n");
                    s.push_str(&format!(
                        "{},{},{},{},{}\n",
                        fmt17(report.value),
                        fmt17(report.value_cdf),
                        fmt17(report.value_quantile),
                        fmt17(report.agreement),
                        report.converged
                    ));
                    s
                }
            };
            emit(&cli.out, &payload)?;
            Ok(if result.converged { EXIT_OK } else { EXIT_NUMERIC })
        }
        Command::Bayes { spec } => run_bayes(spec, &cfg, cli.format, &cli.out),
        Command::Kernel { p1, grid } => run_kernel(p1, *grid, &cfg, cli.format, &cli.out),
        Command::Verify { suite, pairs } => run_verify(suite, *pairs, &cfg, &cli.out),
        Command::Sweep { spec, param, values, parallel } => {
            run_sweep(spec, param, values, *parallel, &cfg, &cli.out)
        }
    }
}
