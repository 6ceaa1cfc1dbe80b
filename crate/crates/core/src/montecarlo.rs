//! Replicated CLT experiments: empirical CDFs, Kolmogorov–Smirnov distances
//! to the limit laws, and per-n convergence reports.

use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{sample, DistributionSpec, PathSampler};
use crate::error::MonteCarloError;
use crate::limits::LimitLaw;
use crate::statistics::{geometric_mean_loo, max_relative_deviation, remainder_magnitude, StatisticKind};
use crate::sum::CompensatedSum;

/// Sorted sample with `F(x) = #{v <= x} / M`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self, MonteCarloError> {
        if values.is_empty() {
            return Err(MonteCarloError::Empty);
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// `sup_x |F(x) - law(x)|`, evaluated exactly at the jump points. Left
    /// limits of the law are used on the lower side so point masses are
    /// handled correctly.
    pub fn ks_distance(&self, law: LimitLaw) -> f64 {
        let m = self.sorted.len() as f64;
        let mut d = 0.0_f64;
        let mut first = 0;
        // one step per distinct value; ties jump together
        while first < self.sorted.len() {
            let v = self.sorted[first];
            let last = first + self.sorted[first..].partition_point(|&w| w <= v);
            let above = last as f64 / m - law.cdf(v);
            let below = left_cdf(law, v) - first as f64 / m;
            d = d.max(above.abs()).max(below.abs());
            first = last;
        }
        d
    }
}

fn left_cdf(law: LimitLaw, x: f64) -> f64 {
    match law {
        LimitLaw::PointMass(mu) => {
            if x > mu {
                1.0
            } else {
                0.0
            }
        }
        other => other.cdf(x),
    }
}

pub fn empirical_cdf(values: &[f64]) -> Result<EmpiricalCdf, MonteCarloError> {
    EmpiricalCdf::new(values.to_vec())
}

pub fn ks_distance(emp: &EmpiricalCdf, law: LimitLaw) -> f64 {
    emp.ks_distance(law)
}

/// The law a statistic converges to in distribution, on the log scale or
/// (for the log-product kinds) on the product scale.
pub fn clt_law(kind: StatisticKind, spec: &DistributionSpec, product_scale: bool) -> LimitLaw {
    let log_law = match kind {
        StatisticKind::LeaveOneOutLogProduct | StatisticKind::LinearizedSum | StatisticKind::StandardizedSum => {
            LimitLaw::StdNormal
        }
        StatisticKind::PrefixLogProduct => LimitLaw::NormalVar2,
        StatisticKind::GeometricMeanPrefix | StatisticKind::GeometricMeanLoo => LimitLaw::PointMass(spec.moments().mu),
    };
    if product_scale && kind.is_log_product() {
        log_law.product_scale()
    } else {
        log_law
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: DistributionSpec,
    pub kind: StatisticKind,
    #[serde(rename = "nList")]
    pub n_list: Vec<usize>,
    #[serde(rename = "M")]
    pub reps: usize,
    #[serde(rename = "baseSeed")]
    pub base_seed: u64,
    #[serde(rename = "compareLaw")]
    pub compare_law: LimitLaw,
    pub workers: usize,
    /// Compare exponentiated log-product statistics with the lognormal law.
    #[serde(rename = "productScale", default)]
    pub product_scale: bool,
}

impl ExperimentConfig {
    /// Config with the matching comparison law, log scale, one worker.
    pub fn new(spec: DistributionSpec, kind: StatisticKind, n_list: Vec<usize>, reps: usize, base_seed: u64) -> Self {
        Self {
            compare_law: clt_law(kind, &spec, false),
            spec,
            kind,
            n_list,
            reps,
            base_seed,
            workers: 1,
            product_scale: false,
        }
    }

    pub fn validate(&self) -> Result<(), MonteCarloError> {
        let bad = |m: String| Err(MonteCarloError::InvalidConfig(m));
        if self.n_list.is_empty() {
            return bad("nList is empty".into());
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad("nList must be strictly increasing".into());
        }
        if self.n_list[0] < self.kind.min_n() {
            return bad(format!("statistic {} needs n >= {}", self.kind, self.kind.min_n()));
        }
        if self.n_list.len() as u64 > 1 << 32 || self.reps as u64 > 1 << 32 {
            return bad("nList length and M must fit in 32 bits".into());
        }
        if self.reps == 0 {
            return bad("M must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        let expected = clt_law(self.kind, &self.spec, self.product_scale);
        if self.compare_law != expected {
            return bad(format!(
                "compareLaw {} does not match statistic {} (expected {expected})",
                self.compare_law, self.kind
            ));
        }
        Ok(())
    }
}

/// Stream of replicate `rep` in row `row`: `row * 2^32 + rep`.
pub fn replicate_stream(row: usize, rep: usize) -> u64 {
    ((row as u64) << 32) | rep as u64
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub reps: usize,
    pub ks: f64,
    pub mean: f64,
    pub sd: f64,
    /// NaN unless the statistic is a leave-one-out kind.
    pub mean_remainder: f64,
    pub mean_max_deviation: f64,
    pub seconds: f64,
    /// Replicates whose statistic could not be evaluated; a nonzero count
    /// voids the row.
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub const CSV_HEADER: &'static str = "n,M,ks,mean,sd,mean_remainder,mean_maxdev,seconds";

    /// Writes the CSV report. Without `timing` the `seconds` column is 0 so
    /// that reports are byte-reproducible.
    pub fn write_csv<W: Write>(&self, mut w: W, timing: bool) -> io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            let secs = if timing { r.seconds } else { 0.0 };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.n, r.reps, r.ks, r.mean, r.sd, r.mean_remainder, r.mean_max_deviation, secs
            )?;
        }
        Ok(())
    }
}

struct Replicate {
    value: Option<f64>,
    remainder: f64,
    max_dev: f64,
}

fn run_replicate(config: &ExperimentConfig, row: usize, n: usize, rep: usize) -> Replicate {
    let m = config.spec.moments();
    let path = match sample(&config.spec, n, config.base_seed, replicate_stream(row, rep)) {
        Ok(p) => p,
        Err(_) => return Replicate { value: None, remainder: f64::NAN, max_dev: f64::NAN },
    };
    let value = config.kind.evaluate(&path, &m).ok().map(|t| {
        if config.product_scale && config.kind.is_log_product() {
            t.exp()
        } else {
            t
        }
    });
    let (remainder, max_dev) = match config.kind {
        StatisticKind::LeaveOneOutLogProduct | StatisticKind::LinearizedSum => (
            remainder_magnitude(&path, m.mu, m.gamma).unwrap_or(f64::NAN),
            max_relative_deviation(&path, m.mu).unwrap_or(f64::NAN),
        ),
        _ => (f64::NAN, f64::NAN),
    };
    Replicate { value, remainder, max_dev }
}

fn mean_of(xs: impl Iterator<Item = f64>, count: usize) -> f64 {
    xs.collect::<CompensatedSum>().value() / count as f64
}

/// Runs every row of the experiment. Replicates are evaluated on a pool of
/// `config.workers` threads and reduced in replicate order, so the report
/// does not depend on the worker count.
pub fn run_clt_experiment(config: &ExperimentConfig) -> Result<ConvergenceReport, MonteCarloError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| MonteCarloError::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let mut rows = Vec::with_capacity(config.n_list.len());
    for (row, &n) in config.n_list.iter().enumerate() {
        let start = Instant::now();
        let reps: Vec<Replicate> =
            pool.install(|| (0..config.reps).into_par_iter().map(|r| run_replicate(config, row, n, r)).collect());
        let failures = reps.iter().filter(|r| r.value.is_none()).count();
        let m = config.reps;
        let row = if failures > 0 {
            ConvergenceRow {
                n,
                reps: m,
                ks: f64::NAN,
                mean: f64::NAN,
                sd: f64::NAN,
                mean_remainder: f64::NAN,
                mean_max_deviation: f64::NAN,
                seconds: start.elapsed().as_secs_f64(),
                failures,
            }
        } else {
            let values: Vec<f64> = reps.iter().filter_map(|r| r.value).collect();
            let mean = mean_of(values.iter().copied(), m);
            let sd =
                if m > 1 { mean_of(values.iter().map(|v| (v - mean) * (v - mean)), m - 1).sqrt() } else { f64::NAN };
            let ks = EmpiricalCdf::new(values)?.ks_distance(config.compare_law);
            ConvergenceRow {
                n,
                reps: m,
                ks,
                mean,
                sd,
                mean_remainder: mean_of(reps.iter().map(|r| r.remainder), m),
                mean_max_deviation: mean_of(reps.iter().map(|r| r.max_dev), m),
                seconds: start.elapsed().as_secs_f64(),
                failures: 0,
            }
        };
        rows.push(row);
    }
    Ok(ConvergenceReport { config: config.clone(), rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SllnRow {
    pub n: usize,
    pub gm_prefix: f64,
    /// NaN at n = 1.
    pub gm_loo: f64,
    pub err_prefix: f64,
    pub err_loo: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SllnReport {
    pub spec: DistributionSpec,
    pub seed: u64,
    pub mu: f64,
    pub rows: Vec<SllnRow>,
}

impl SllnReport {
    pub const CSV_HEADER: &'static str = "n,gm_prefix,gm_loo,err_prefix,err_loo";

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{}", r.n, r.gm_prefix, r.gm_loo, r.err_prefix, r.err_loo)?;
        }
        Ok(())
    }
}

/// Geometric means of the normalized prefix and leave-one-out sums along one
/// path (stream 0 of `seed`), checkpointed at each n in `n_list`.
pub fn run_slln_experiment(
    spec: &DistributionSpec,
    n_list: &[usize],
    seed: u64,
) -> Result<SllnReport, MonteCarloError> {
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MonteCarloError::InvalidConfig("nList must be nonempty, positive and strictly increasing".into()));
    }
    let mu = spec.moments().mu;
    let horizon = *n_list.last().expect("nonempty");
    let path: Vec<f64> = PathSampler::new(*spec, seed, 0).take(horizon).collect();
    let mut prefix = CompensatedSum::new();
    let mut log_ratio = CompensatedSum::new();
    let mut checkpoints = n_list.iter().peekable();
    let mut rows = Vec::with_capacity(n_list.len());
    for (i, &x) in path.iter().enumerate() {
        let k = i + 1;
        prefix.add(x);
        log_ratio.add((prefix.value() / k as f64).ln());
        if checkpoints.peek() == Some(&&k) {
            checkpoints.next();
            let gm_prefix = (log_ratio.value() / k as f64).exp();
            let gm_loo = if k >= 2 { geometric_mean_loo(&path[..k])? } else { f64::NAN };
            rows.push(SllnRow {
                n: k,
                gm_prefix,
                gm_loo,
                err_prefix: (gm_prefix - mu).abs(),
                err_loo: (gm_loo - mu).abs(),
            });
        }
    }
    Ok(SllnReport { spec: *spec, seed, mu, rows })
}
