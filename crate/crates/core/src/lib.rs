//! Central limit theorems, almost-sure central limit theorems and strong laws
//! for products of partial sums `S_k` and leave-one-out sums
//! `S_{n,k} = S_n - X_k` of i.i.d. positive random variables, with the
//! machinery to verify them by simulation.
//!
//! * [`distributions`]: positive families, exact moments, reproducible streams.
//! * [`statistics`]: exact O(n) statistics and diagnostics.
//! * [`streaming`]: O(1)-per-draw power-sum series for the leave-one-out statistic.
//! * [`limits`]: normal CDF/quantile and the limit laws.
//! * [`asclt`]: logarithmic averages along a single path.
//! * [`montecarlo`]: replicated experiments, empirical CDFs and KS distances.

pub mod asclt;
pub mod distributions;
pub mod error;
pub mod limits;
pub mod montecarlo;
pub mod statistics;
pub mod streaming;
pub mod sum;

pub use asclt::{run_asclt_path, AscltReport, LogAvgAccumulator};
pub use distributions::{make_distribution, sample, DistributionSpec, Moments, SamplePath};
pub use error::{AscltError, DistributionError, LimitError, MonteCarloError, StatisticError, StreamingError};
pub use limits::{limit_cdf, normal_cdf, normal_quantile, LimitLaw};
pub use montecarlo::{run_clt_experiment, run_slln_experiment, ConvergenceReport, EmpiricalCdf, ExperimentConfig};
pub use statistics::StatisticKind;
pub use streaming::PowerSumState;
