//! Logarithmically averaged empirical distribution functions along a single
//! trajectory:
//!
//! ```text
//! A_N(x) = (sum_{n=2}^N (1/n) I(t_n <= x)) / (sum_{n=2}^N 1/n)
//! ```
//!
//! Averaging starts at n = 2 since the leave-one-out statistic has no value
//! at n = 1. The normalizer `H_N - 1` is asymptotically `log N`; the
//! `log N`-normalized values are reported alongside.

use std::io::{self, Write};

use crate::distributions::{DistributionSpec, PathSampler};
use crate::error::{AscltError, StatisticError};
use crate::limits::LimitLaw;
use crate::statistics::{loo_log_statistic, StatisticKind};
use crate::streaming::PowerSumState;
use crate::sum::CompensatedSum;

/// Probabilities of the default evaluation grid: 0.05, 0.10, ..., 0.95.
pub fn default_grid_probabilities() -> Vec<f64> {
    (1..=19).map(|i| i as f64 / 20.0).collect()
}

/// Default grid for a law: its quantiles at [`default_grid_probabilities`].
/// For the standard normal these are the 19 normal quantiles.
pub fn default_grid(law: LimitLaw) -> Vec<f64> {
    default_grid_probabilities()
        .into_iter()
        .map(|p| law.quantile(p).expect("grid probabilities lie in (0, 1)"))
        .collect()
}

#[derive(Clone, Debug)]
pub struct LogAvgAccumulator {
    grid: Vec<f64>,
    /// `buckets[j]` holds the weight of observations with
    /// `grid[j-1] < t <= grid[j]`; the last bucket is `t > grid[last]`.
    buckets: Vec<CompensatedSum>,
    total: CompensatedSum,
    last_n: usize,
}

impl LogAvgAccumulator {
    pub fn new(grid: Vec<f64>) -> Result<Self, AscltError> {
        if grid.is_empty() || grid.iter().any(|x| x.is_nan()) || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AscltError::UnsortedGrid);
        }
        let buckets = vec![CompensatedSum::new(); grid.len() + 1];
        Ok(Self { grid, buckets, total: CompensatedSum::new(), last_n: 1 })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn last_n(&self) -> usize {
        self.last_n
    }

    /// `sum_{n=2}^{lastN} 1/n`.
    pub fn total_weight(&self) -> f64 {
        self.total.value()
    }

    /// Adds weight `1/n` to every grid point `x_j >= t`.
    pub fn accumulate(&mut self, n: usize, t: f64) -> Result<(), AscltError> {
        if n != self.last_n + 1 {
            return Err(AscltError::NonSequentialN { expected: self.last_n + 1, got: n });
        }
        let w = 1.0 / n as f64;
        let idx = if t.is_nan() { self.grid.len() } else { self.grid.partition_point(|&g| g < t) };
        self.buckets[idx].add(w);
        self.total.add(w);
        self.last_n = n;
        Ok(())
    }

    /// Un-normalized weights `sum (1/n) I(t_n <= x_j)`.
    pub fn weights(&self) -> Vec<f64> {
        let mut acc = CompensatedSum::new();
        self.buckets[..self.grid.len()]
            .iter()
            .map(|b| {
                acc.add(b.value());
                acc.value()
            })
            .collect()
    }

    /// `A_N(x_j) = weights[j] / totalWeight`.
    pub fn evaluate(&self) -> Result<Vec<f64>, AscltError> {
        if self.last_n < 2 {
            return Err(AscltError::Empty);
        }
        let total = self.total_weight();
        Ok(self.weights().into_iter().map(|w| (w / total).min(1.0)).collect())
    }

    /// Weights normalized by `log N` instead of `H_N - 1`.
    pub fn evaluate_log_normalized(&self) -> Result<Vec<f64>, AscltError> {
        if self.last_n < 2 {
            return Err(AscltError::Empty);
        }
        let log_n = (self.last_n as f64).ln();
        Ok(self.weights().into_iter().map(|w| w / log_n).collect())
    }
}

/// Law that the logarithmic averages of `kind` converge to. Product-form
/// statistics are compared on the log scale.
pub fn asclt_law(kind: StatisticKind) -> Result<LimitLaw, AscltError> {
    match kind {
        StatisticKind::LeaveOneOutLogProduct | StatisticKind::LinearizedSum | StatisticKind::StandardizedSum => {
            Ok(LimitLaw::StdNormal)
        }
        StatisticKind::PrefixLogProduct => Ok(LimitLaw::NormalVar2),
        other => Err(AscltError::UnsupportedKind(other.tag())),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AscltReport {
    pub kind: StatisticKind,
    pub law: LimitLaw,
    pub horizon: usize,
    pub first_n: usize,
    pub grid: Vec<f64>,
    pub a_n: Vec<f64>,
    pub a_n_log_normalized: Vec<f64>,
    pub f_limit: Vec<f64>,
    pub sup_gap: f64,
    pub sup_gap_log_normalized: f64,
    /// First n evaluated with the power-sum series (leave-one-out kind only).
    pub mode_switch: Option<usize>,
    /// Steps past the cutoff that fell back to exact evaluation.
    pub exact_fallbacks: usize,
    pub total_weight: f64,
}

impl AscltReport {
    pub fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.a_n.iter().zip(&self.f_limit).map(|(a, f)| (a - f).abs())
    }

    /// CSV with header `x,A_N,F_limit,gap`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,A_N,F_limit,gap")?;
        for (((x, a), f), g) in self.grid.iter().zip(&self.a_n).zip(&self.f_limit).zip(self.gaps()) {
            writeln!(w, "{x},{a},{f},{g}")?;
        }
        Ok(())
    }
}

/// Per-step statistic evaluation for the streamed kinds.
struct StepEvaluator {
    kind: StatisticKind,
    mu: f64,
    sigma: f64,
    gamma: f64,
    exact_cutoff: usize,
    state: PowerSumState,
    std_sum: CompensatedSum,
    prefix_dev: CompensatedSum,
    prefix_log: CompensatedSum,
    mode_switch: Option<usize>,
    exact_fallbacks: usize,
}

impl StepEvaluator {
    fn push(&mut self, x: f64, n: usize) -> Result<(), AscltError> {
        self.state.push(x)?;
        match self.kind {
            StatisticKind::StandardizedSum => self.std_sum.add((x - self.mu) / self.sigma),
            StatisticKind::PrefixLogProduct => {
                self.prefix_dev.add(x - self.mu);
                self.prefix_log.add((self.prefix_dev.value() / (n as f64 * self.mu)).ln_1p());
            }
            _ => {}
        }
        Ok(())
    }

    fn statistic(&mut self, path: &[f64]) -> Result<f64, AscltError> {
        let n = path.len();
        let root_n = (n as f64).sqrt();
        Ok(match self.kind {
            StatisticKind::StandardizedSum => self.std_sum.value() / root_n,
            StatisticKind::PrefixLogProduct => self.prefix_log.value() / (self.gamma * root_n),
            StatisticKind::LinearizedSum => self.state.linearized(self.gamma)?,
            StatisticKind::LeaveOneOutLogProduct => {
                if n <= self.exact_cutoff {
                    loo_log_statistic(path, self.mu, self.gamma)?
                } else {
                    let s = self.state.loo_log_series(self.gamma)?;
                    if s.valid {
                        self.mode_switch.get_or_insert(n);
                        s.value
                    } else {
                        self.exact_fallbacks += 1;
                        loo_log_statistic(path, self.mu, self.gamma)?
                    }
                }
            }
            other => return Err(AscltError::UnsupportedKind(other.tag())),
        })
    }
}

/// Streams one path of length `horizon` drawn from stream 0 of `seed` and
/// accumulates the logarithmic averages of `kind` for n = 2..=horizon.
///
/// The leave-one-out statistic is evaluated exactly (O(n)) up to
/// `exact_cutoff` and by the power-sum series afterwards, reverting to the
/// exact value whenever the series is outside its validity region. The other
/// kinds are updated exactly in O(1) per step.
pub fn run_asclt_path(
    spec: &DistributionSpec,
    kind: StatisticKind,
    horizon: usize,
    seed: u64,
    grid: &[f64],
    exact_cutoff: usize,
) -> Result<AscltReport, AscltError> {
    let path: Vec<f64> = PathSampler::new(*spec, seed, 0).take(horizon).collect();
    run_asclt_on_path(spec, kind, &path, grid, exact_cutoff)
}

/// [`run_asclt_path`] on a given path.
pub fn run_asclt_on_path(
    spec: &DistributionSpec,
    kind: StatisticKind,
    path: &[f64],
    grid: &[f64],
    exact_cutoff: usize,
) -> Result<AscltReport, AscltError> {
    let horizon = path.len();
    if horizon < 2 || exact_cutoff < 2 {
        return Err(AscltError::InvalidRun);
    }
    let law = asclt_law(kind)?;
    let m = spec.moments();
    let mut acc = LogAvgAccumulator::new(grid.to_vec())?;
    let mut eval = StepEvaluator {
        kind,
        mu: m.mu,
        sigma: m.sigma,
        gamma: m.gamma,
        exact_cutoff,
        state: PowerSumState::new(m.mu)?,
        std_sum: CompensatedSum::new(),
        prefix_dev: CompensatedSum::new(),
        prefix_log: CompensatedSum::new(),
        mode_switch: None,
        exact_fallbacks: 0,
    };
    for (i, &x) in path.iter().enumerate() {
        let n = i + 1;
        if !(x > 0.0 && x.is_finite()) {
            return Err(StatisticError::NonpositiveParameter { name: "draw", value: x }.into());
        }
        eval.push(x, n)?;
        if n >= 2 {
            let t = eval.statistic(&path[..n])?;
            acc.accumulate(n, t)?;
        }
    }

    let a_n = acc.evaluate()?;
    let a_n_log_normalized = acc.evaluate_log_normalized()?;
    let f_limit: Vec<f64> = grid.iter().map(|&x| law.cdf(x)).collect();
    let sup = |a: &[f64]| a.iter().zip(&f_limit).fold(0.0_f64, |m, (a, f)| m.max((a - f).abs()));
    Ok(AscltReport {
        kind,
        law,
        horizon,
        first_n: 2,
        grid: grid.to_vec(),
        sup_gap: sup(&a_n),
        sup_gap_log_normalized: sup(&a_n_log_normalized),
        a_n,
        a_n_log_normalized,
        f_limit,
        mode_switch: eval.mode_switch,
        exact_fallbacks: eval.exact_fallbacks,
        total_weight: acc.total_weight(),
    })
}
