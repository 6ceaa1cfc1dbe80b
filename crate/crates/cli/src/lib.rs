//! Command-line front end: resolves flags and JSON configs into experiment
//! runs and writes CSV reports (plus optional gnuplot scripts).
//!
//! Exit codes: 0 success, 1 runtime failure (including a failed identity
//! check), 2 usage or config error.

pub mod config;
pub mod plot;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};
use prodsum::asclt::{asclt_law, default_grid, run_asclt_path};
use prodsum::montecarlo::{clt_law, run_clt_experiment, run_slln_experiment, ExperimentConfig};
use prodsum::statistics::{linearized_statistic, standardized_sum};
use prodsum::sum::compensated_sum;
use prodsum::{sample, DistributionSpec, StatisticKind};
use thiserror::Error;

use crate::config::{
    read_config, to_json, write_config, AscltConfig, DistTableConfig, IdentityConfig, SllnConfig, DEFAULT_EXACT_CUTOFF,
    DEFAULT_SAMPLES, DEFAULT_SEED,
};
use crate::plot::{emit_plot_script, PlotLayout};

/// Largest tolerated `|linearized - standardized|` in the identity check.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Runtime(_) => 1,
        }
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "prodsum", version, about = "Limit theorems for products of partial and leave-one-out sums")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Replicated CLT experiment: KS distance to the limit law for each n.
    Clt(CltArgs),
    /// Logarithmic averages along one path (almost-sure CLT).
    Asclt(AscltArgs),
    /// Geometric means of normalized partial sums along one path.
    Slln(SllnArgs),
    /// Checks that the linearized leave-one-out statistic equals the standardized sum.
    Identity(IdentityArgs),
    /// Analytic moments of distributions next to sampled ones.
    DistTable(DistTableArgs),
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the resolved config as JSON to this path.
    #[arg(long = "emit-config")]
    pub emit_config: Option<PathBuf>,
    /// Output CSV path (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Base seed for all random streams.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_dist(s: &str) -> Result<DistributionSpec, String> {
    s.parse::<DistributionSpec>().map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
pub struct CltArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Distribution as family:param1[:param2[:param3]].
    #[arg(long, value_parser = parse_dist)]
    pub dist: Option<DistributionSpec>,
    #[arg(long, value_parser = PossibleValuesParser::new(["loo", "rw", "lin", "std", "gm-prefix", "gm-loo"]))]
    pub stat: Option<String>,
    /// Comma-separated, strictly increasing path lengths.
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Replications per path length.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Compare exponentiated log-product statistics against the lognormal law.
    #[arg(long = "product-scale")]
    pub product_scale: bool,
    /// Write a gnuplot script for the report to this path (needs --out).
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Fill the seconds column with wall-clock times instead of 0.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct AscltArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_parser = parse_dist)]
    pub dist: Option<DistributionSpec>,
    #[arg(long, value_parser = PossibleValuesParser::new(["loo", "rw", "lin", "std"]))]
    pub stat: Option<String>,
    /// Path length.
    #[arg(long = "N")]
    pub horizon: Option<usize>,
    /// Largest n evaluated exactly for the leave-one-out statistic.
    #[arg(long = "exact-cutoff")]
    pub exact_cutoff: Option<usize>,
    /// Comma-separated, strictly increasing evaluation grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SllnArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_parser = parse_dist)]
    pub dist: Option<DistributionSpec>,
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IdentityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_parser = parse_dist)]
    pub dist: Option<DistributionSpec>,
    #[arg(long = "n")]
    pub n: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Use this value in place of the analytic mean.
    #[arg(long = "mu-override")]
    pub mu_override: Option<f64>,
}

#[derive(Args, Debug)]
pub struct DistTableArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Distributions to tabulate (comma-separated or repeated); one default
    /// per family when absent.
    #[arg(long, value_parser = parse_dist, value_delimiter = ',')]
    pub dist: Option<Vec<DistributionSpec>>,
    /// Draws per distribution.
    #[arg(long)]
    pub samples: Option<usize>,
}

fn required<T>(flag: Option<T>, base: Option<T>, name: &str) -> Result<T, CliError> {
    flag.or(base).ok_or_else(|| CliError::Usage(format!("missing required flag --{name}")))
}

fn load<T: serde::de::DeserializeOwned>(path: &Option<PathBuf>) -> Result<Option<T>, CliError> {
    path.as_deref().map(read_config).transpose()
}

fn parse_kind(s: Option<String>) -> Option<StatisticKind> {
    // values were already restricted by clap
    s.map(|s| s.parse().expect("clap restricts --stat to known tags"))
}

pub fn resolve_clt(args: &CltArgs) -> Result<ExperimentConfig, CliError> {
    let base: Option<ExperimentConfig> = load(&args.common.config)?;
    let b = base.as_ref();
    let kind_flag = parse_kind(args.stat.clone());
    let spec = required(args.dist, b.map(|c| c.spec), "dist")?;
    let kind = required(kind_flag, b.map(|c| c.kind), "stat")?;
    let product_scale = args.product_scale || b.is_some_and(|c| c.product_scale);
    let compare_law = match b {
        Some(c) if c.kind == kind && c.product_scale == product_scale && c.spec == spec => c.compare_law,
        _ => clt_law(kind, &spec, product_scale),
    };
    let cfg = ExperimentConfig {
        spec,
        kind,
        n_list: required(args.n.clone(), b.map(|c| c.n_list.clone()), "n")?,
        reps: required(args.reps, b.map(|c| c.reps), "reps")?,
        base_seed: args.common.seed.or(b.map(|c| c.base_seed)).unwrap_or(DEFAULT_SEED),
        compare_law,
        workers: args.workers.or(b.map(|c| c.workers)).unwrap_or(1),
        product_scale,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

pub fn resolve_asclt(args: &AscltArgs) -> Result<AscltConfig, CliError> {
    let base: Option<AscltConfig> = load(&args.common.config)?;
    let b = base.as_ref();
    let cfg = AscltConfig {
        spec: required(args.dist, b.map(|c| c.spec), "dist")?,
        kind: required(parse_kind(args.stat.clone()), b.map(|c| c.kind), "stat")?,
        horizon: required(args.horizon, b.map(|c| c.horizon), "N")?,
        base_seed: args.common.seed.or(b.map(|c| c.base_seed)).unwrap_or(DEFAULT_SEED),
        exact_cutoff: args.exact_cutoff.or(b.map(|c| c.exact_cutoff)).unwrap_or(DEFAULT_EXACT_CUTOFF),
        grid: args.grid.clone().or(b.and_then(|c| c.grid.clone())),
        workers: args.workers.or(b.map(|c| c.workers)).unwrap_or(1),
    };
    asclt_law(cfg.kind).map_err(|e| CliError::Usage(e.to_string()))?;
    if cfg.horizon < 2 || cfg.exact_cutoff < 2 {
        return Err(CliError::Usage("--N and --exact-cutoff must be at least 2".into()));
    }
    if cfg.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    Ok(cfg)
}

pub fn resolve_slln(args: &SllnArgs) -> Result<SllnConfig, CliError> {
    let base: Option<SllnConfig> = load(&args.common.config)?;
    let b = base.as_ref();
    Ok(SllnConfig {
        spec: required(args.dist, b.map(|c| c.spec), "dist")?,
        n_list: required(args.n.clone(), b.map(|c| c.n_list.clone()), "n")?,
        base_seed: args.common.seed.or(b.map(|c| c.base_seed)).unwrap_or(DEFAULT_SEED),
    })
}

pub fn resolve_identity(args: &IdentityArgs) -> Result<IdentityConfig, CliError> {
    let base: Option<IdentityConfig> = load(&args.common.config)?;
    let b = base.as_ref();
    let cfg = IdentityConfig {
        spec: required(args.dist, b.map(|c| c.spec), "dist")?,
        n: required(args.n, b.map(|c| c.n), "n")?,
        reps: required(args.reps, b.map(|c| c.reps), "reps")?,
        base_seed: args.common.seed.or(b.map(|c| c.base_seed)).unwrap_or(DEFAULT_SEED),
        mu_override: args.mu_override.or(b.and_then(|c| c.mu_override)),
    };
    if cfg.n < 2 || cfg.reps == 0 {
        return Err(CliError::Usage("identity needs --n >= 2 and --reps >= 1".into()));
    }
    if let Some(mu) = cfg.mu_override {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(CliError::Usage("--mu-override must be positive".into()));
        }
    }
    Ok(cfg)
}

pub fn resolve_dist_table(args: &DistTableArgs) -> Result<DistTableConfig, CliError> {
    let base: Option<DistTableConfig> = load(&args.common.config)?;
    let b = base.as_ref();
    let defaults = || -> Vec<DistributionSpec> {
        ["exponential:1", "gamma:4:0.5", "lognormal:0:0.5", "uniform:0.5:1.5", "twopoint:1:3:0.5"]
            .iter()
            .map(|s| s.parse().expect("valid default"))
            .collect()
    };
    let cfg = DistTableConfig {
        specs: args.dist.clone().or(b.map(|c| c.specs.clone())).unwrap_or_else(defaults),
        samples: args.samples.or(b.map(|c| c.samples)).unwrap_or(DEFAULT_SAMPLES),
        base_seed: args.common.seed.or(b.map(|c| c.base_seed)).unwrap_or(DEFAULT_SEED),
    };
    if cfg.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    Ok(cfg)
}

fn announce<T: serde::Serialize>(cmd: &str, cfg: &T, common: &CommonArgs, err: &mut dyn Write) -> Result<(), CliError> {
    let _ = writeln!(err, "prodsum {cmd}: resolved config\n{}", to_json(cfg));
    if let Some(path) = &common.emit_config {
        write_config(cfg, path)?;
    }
    Ok(())
}

fn emit(bytes: &[u8], out: &Option<PathBuf>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => stdout.write_all(bytes).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn maybe_plot(plot: &Option<PathBuf>, out: &Option<PathBuf>, layout: PlotLayout, rows: usize) -> Result<(), CliError> {
    let Some(script) = plot else { return Ok(()) };
    let csv = out.as_deref().ok_or_else(|| CliError::Usage("--plot needs --out".into()))?;
    emit_plot_script(layout, rows, csv, script)
}

fn run_clt(args: CltArgs, stdout: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = resolve_clt(&args)?;
    announce("clt", &cfg, &args.common, err)?;
    let report = run_clt_experiment(&cfg).map_err(runtime)?;
    for r in &report.rows {
        let _ = writeln!(err, "n = {}: ks = {:.6}, {:.3} s, failures = {}", r.n, r.ks, r.seconds, r.failures);
    }
    let mut buf = Vec::new();
    report.write_csv(&mut buf, args.timing).map_err(runtime)?;
    emit(&buf, &args.common.out, stdout)?;
    maybe_plot(&args.plot, &args.common.out, PlotLayout::Convergence, report.rows.len())?;
    if report.rows.iter().any(|r| r.failures > 0) {
        return Err(CliError::Runtime("some replicates could not be evaluated".into()));
    }
    Ok(0)
}

fn run_asclt(args: AscltArgs, stdout: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = resolve_asclt(&args)?;
    announce("asclt", &cfg, &args.common, err)?;
    let law = asclt_law(cfg.kind).map_err(runtime)?;
    let grid = cfg.grid.clone().unwrap_or_else(|| default_grid(law));
    let report = run_asclt_path(&cfg.spec, cfg.kind, cfg.horizon, cfg.base_seed, &grid, cfg.exact_cutoff).map_err(
        |e| match e {
            prodsum::AscltError::UnsortedGrid => CliError::Usage(e.to_string()),
            other => runtime(other),
        },
    )?;
    let _ = writeln!(
        err,
        "averaging over n = {}..={} (the leave-one-out statistic is undefined at n = 1)\n\
         sup gap (H_N - 1 normalized) = {:.6}\nsup gap (log N normalized) = {:.6}\n\
         series mode from n = {}, exact fallbacks = {}",
        report.first_n,
        report.horizon,
        report.sup_gap,
        report.sup_gap_log_normalized,
        report.mode_switch.map_or("-".to_string(), |n| n.to_string()),
        report.exact_fallbacks,
    );
    let mut buf = Vec::new();
    report.write_csv(&mut buf).map_err(runtime)?;
    emit(&buf, &args.common.out, stdout)?;
    maybe_plot(&args.plot, &args.common.out, PlotLayout::Asclt, report.grid.len())?;
    Ok(0)
}

fn run_slln(args: SllnArgs, stdout: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = resolve_slln(&args)?;
    announce("slln", &cfg, &args.common, err)?;
    let report = run_slln_experiment(&cfg.spec, &cfg.n_list, cfg.base_seed).map_err(|e| match e {
        prodsum::MonteCarloError::InvalidConfig(m) => CliError::Usage(m),
        other => runtime(other),
    })?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf).map_err(runtime)?;
    emit(&buf, &args.common.out, stdout)?;
    maybe_plot(&args.plot, &args.common.out, PlotLayout::Slln, report.rows.len())?;
    Ok(0)
}

/// Largest `|linearized - standardized|` over the configured replicates.
pub fn identity_discrepancy(cfg: &IdentityConfig) -> Result<f64, CliError> {
    let m = cfg.spec.moments();
    let mu = cfg.mu_override.unwrap_or(m.mu);
    let mut worst = 0.0_f64;
    for rep in 0..cfg.reps {
        let path = sample(&cfg.spec, cfg.n, cfg.base_seed, rep as u64).map_err(runtime)?;
        let lin = linearized_statistic(&path, mu, m.gamma).map_err(runtime)?;
        let std = standardized_sum(&path, mu, m.sigma).map_err(runtime)?;
        worst = worst.max((lin - std).abs());
    }
    Ok(worst)
}

fn run_identity(args: IdentityArgs, stdout: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = resolve_identity(&args)?;
    announce("identity", &cfg, &args.common, err)?;
    let worst = identity_discrepancy(&cfg)?;
    let ok = worst <= IDENTITY_TOLERANCE;
    let line = format!("max |linearized - standardized| = {worst:e} ({})\n", if ok { "ok" } else { "FAILED" });
    emit(line.as_bytes(), &args.common.out, stdout)?;
    Ok(if ok { 0 } else { 1 })
}

fn run_dist_table(args: DistTableArgs, stdout: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = resolve_dist_table(&args)?;
    announce("dist-table", &cfg, &args.common, err)?;
    let mut buf = Vec::new();
    let w = &mut buf;
    writeln!(w, "dist,mu,sigma,gamma,sample_mean,sample_sd,sample_min").map_err(runtime)?;
    for (i, spec) in cfg.specs.iter().enumerate() {
        let m = spec.moments();
        let path = sample(spec, cfg.samples, cfg.base_seed, i as u64).map_err(runtime)?;
        let n = path.len() as f64;
        let mean = compensated_sum(path.iter().copied()) / n;
        let var = compensated_sum(path.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
        let min = path.iter().copied().fold(f64::INFINITY, f64::min);
        writeln!(w, "{spec},{},{},{},{mean},{},{min}", m.mu, m.sigma, m.gamma, var.sqrt()).map_err(runtime)?;
    }
    emit(&buf, &args.common.out, stdout)?;
    Ok(0)
}

/// Parses `argv` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn parse_and_run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(text.as_bytes());
            } else {
                let _ = stderr.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Clt(a) => run_clt(a, stdout, stderr),
        Command::Asclt(a) => run_asclt(a, stdout, stderr),
        Command::Slln(a) => run_slln(a, stdout, stderr),
        Command::Identity(a) => run_identity(a, stdout, stderr),
        Command::DistTable(a) => run_dist_table(a, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "prodsum: {e}");
            e.exit_code()
        }
    }
}

/// [`parse_and_run`] on the real process streams.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    parse_and_run(argv, &mut io::stdout().lock(), &mut io::stderr().lock())
}
