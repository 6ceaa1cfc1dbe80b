use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("unknown distribution family {0:?} (expected one of exponential, gamma, lognormal, uniform, twopoint)")]
    UnknownFamily(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("sample length must be at least 1")]
    ZeroLength,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatisticError {
    #[error("path is empty")]
    EmptyPath,
    #[error("leave-one-out statistics need n >= 2, got n = {0}")]
    DegenerateN(usize),
    #[error("leave-one-out sum S_n - X_{index} is not positive ({value})")]
    NonpositiveLooSum { index: usize, value: f64 },
    #[error("parameter {name} must be positive and finite, got {value}")]
    NonpositiveParameter { name: &'static str, value: f64 },
    #[error("unknown statistic {0:?} (expected one of loo, rw, lin, std, gm-prefix, gm-loo)")]
    UnknownKind(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StreamingError {
    #[error("mu must be positive and finite, got {0}")]
    NonpositiveMu(f64),
    #[error("draw must be positive and finite, got {0}")]
    NonpositiveDraw(f64),
    #[error("series evaluation needs n >= 2, got n = {0}")]
    DegenerateN(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LimitError {
    #[error("probability {0} outside (0, 1)")]
    OutOfRange(f64),
    #[error("unknown limit law {0:?} (expected one of n01, n02, expnorm, expsqrt2, point:<mu>)")]
    UnknownLaw(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AscltError {
    #[error("grid must be nonempty and strictly increasing")]
    UnsortedGrid,
    #[error("accumulate expected n = {expected}, got n = {got}")]
    NonSequentialN { expected: usize, got: usize },
    #[error("accumulator has no observations yet")]
    Empty,
    #[error("run needs N >= 2 and exactCutoff >= 2")]
    InvalidRun,
    #[error("statistic {0} has no almost-sure logarithmic-average law here")]
    UnsupportedKind(&'static str),
    #[error(transparent)]
    Statistic(#[from] StatisticError),
    #[error(transparent)]
    Streaming(#[from] StreamingError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonteCarloError {
    #[error("no values to build an empirical CDF from")]
    Empty,
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Statistic(#[from] StatisticError),
}
