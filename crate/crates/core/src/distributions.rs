//! Positive-support distribution families, their exact moments, and
//! reproducible stream-split sampling.
//!
//! Every path is drawn from a ChaCha8 generator. The 256-bit key is expanded
//! from the base seed with SplitMix64 ([`mix64`]) and the ChaCha stream id is
//! the stream index, so replicate `r` of an experiment always sees the same
//! numbers no matter which thread produces it or in which order.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::DistributionError;

/// A positive random variable with finite, strictly positive variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DistributionSpec {
    Exponential { rate: f64 },
    Gamma { shape: f64, scale: f64 },
    Lognormal { log_mean: f64, log_sd: f64 },
    UniformPositive { a: f64, b: f64 },
    TwoPoint { low: f64, high: f64, p_low: f64 },
}

/// Analytic mean, standard deviation and coefficient of variation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
}

pub const FAMILY_NAMES: [&str; 5] = ["exponential", "gamma", "lognormal", "uniform", "twopoint"];

/// Builds and validates a spec from its family name and positional parameters.
///
/// Parameter orders: `exponential:rate`, `gamma:shape:scale`,
/// `lognormal:logMean:logSd`, `uniform:a:b`, `twopoint:low:high:pLow`.
pub fn make_distribution(family: &str, params: &[f64]) -> Result<DistributionSpec, DistributionError> {
    let arity = match family {
        "exponential" => 1,
        "gamma" | "lognormal" | "uniform" => 2,
        "twopoint" => 3,
        _ => return Err(DistributionError::UnknownFamily(family.to_string())),
    };
    if params.len() != arity {
        return Err(DistributionError::InvalidParams(format!(
            "{family} takes {arity} parameter(s), got {}",
            params.len()
        )));
    }
    if let Some(bad) = params.iter().find(|p| !p.is_finite()) {
        return Err(DistributionError::InvalidParams(format!("non-finite parameter {bad}")));
    }
    let invalid = |msg: &str| Err(DistributionError::InvalidParams(format!("{family}: {msg}")));
    match family {
        "exponential" => {
            let rate = params[0];
            if rate <= 0.0 {
                return invalid("rate must be > 0");
            }
            Ok(DistributionSpec::Exponential { rate })
        }
        "gamma" => {
            let (shape, scale) = (params[0], params[1]);
            if shape <= 0.0 || scale <= 0.0 {
                return invalid("shape and scale must be > 0");
            }
            Ok(DistributionSpec::Gamma { shape, scale })
        }
        "lognormal" => {
            let (log_mean, log_sd) = (params[0], params[1]);
            if log_sd <= 0.0 {
                return invalid("logSd must be > 0");
            }
            Ok(DistributionSpec::Lognormal { log_mean, log_sd })
        }
        "uniform" => {
            let (a, b) = (params[0], params[1]);
            if a <= 0.0 || b <= a {
                return invalid("need 0 < a < b");
            }
            Ok(DistributionSpec::UniformPositive { a, b })
        }
        _ => {
            let (low, high, p_low) = (params[0], params[1], params[2]);
            if low <= 0.0 || high <= low {
                return invalid("need 0 < low < high");
            }
            if p_low <= 0.0 || p_low >= 1.0 {
                return invalid("need 0 < pLow < 1");
            }
            Ok(DistributionSpec::TwoPoint { low, high, p_low })
        }
    }
}

impl DistributionSpec {
    pub fn family(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exponential",
            Self::Gamma { .. } => "gamma",
            Self::Lognormal { .. } => "lognormal",
            Self::UniformPositive { .. } => "uniform",
            Self::TwoPoint { .. } => "twopoint",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Self::Exponential { rate } => vec![rate],
            Self::Gamma { shape, scale } => vec![shape, scale],
            Self::Lognormal { log_mean, log_sd } => vec![log_mean, log_sd],
            Self::UniformPositive { a, b } => vec![a, b],
            Self::TwoPoint { low, high, p_low } => vec![low, high, p_low],
        }
    }

    pub fn moments(&self) -> Moments {
        let (mu, var) = match *self {
            Self::Exponential { rate } => (1.0 / rate, 1.0 / (rate * rate)),
            Self::Gamma { shape, scale } => (shape * scale, shape * scale * scale),
            Self::Lognormal { log_mean, log_sd } => {
                let s2 = log_sd * log_sd;
                ((log_mean + 0.5 * s2).exp(), s2.exp_m1() * (2.0 * log_mean + s2).exp())
            }
            Self::UniformPositive { a, b } => (0.5 * (a + b), (b - a) * (b - a) / 12.0),
            Self::TwoPoint { low, high, p_low } => {
                let d = high - low;
                (p_low * low + (1.0 - p_low) * high, p_low * (1.0 - p_low) * d * d)
            }
        };
        let sigma = var.sqrt();
        let gamma = match *self {
            // exact form that stays accurate when the location is extreme
            Self::Lognormal { log_sd, .. } => (log_sd * log_sd).exp_m1().sqrt(),
            _ => sigma / mu,
        };
        Moments { mu, sigma, gamma }
    }
}

/// Free-function form of [`DistributionSpec::moments`].
pub fn moments(spec: &DistributionSpec) -> Moments {
    spec.moments()
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family())?;
        for p in self.params() {
            write!(f, ":{p}")?;
        }
        Ok(())
    }
}

impl FromStr for DistributionSpec {
    type Err = DistributionError;

    /// Parses the `family:param1[:param2[:param3]]` grammar.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':');
        let family = parts.next().unwrap_or_default().trim();
        let params = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| DistributionError::InvalidParams(format!("cannot parse parameter {p:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        make_distribution(family, &params)
    }
}

impl TryFrom<String> for DistributionSpec {
    type Error = DistributionError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<DistributionSpec> for String {
    fn from(spec: DistributionSpec) -> String {
        spec.to_string()
    }
}

/// SplitMix64 output function: one increment of the golden-ratio Weyl
/// sequence followed by the Stafford variant-13 finalizer.
#[inline]
pub fn mix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for stream `stream_index` under `base_seed`.
///
/// Key words are `mix64(base_seed + i * 0x9E3779B97F4A7C15)` for i = 0..4
/// (the SplitMix64 sequence started at `base_seed`); the ChaCha stream id is
/// `stream_index`. Distinct stream indices therefore never share keystream.
pub fn stream_rng(base_seed: u64, stream_index: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    let mut state = base_seed;
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&mix64(state).to_le_bytes());
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(stream_index);
    rng
}

/// Incremental sampler for one stream.
pub struct PathSampler {
    spec: DistributionSpec,
    rng: ChaCha8Rng,
}

impl PathSampler {
    pub fn new(spec: DistributionSpec, base_seed: u64, stream_index: u64) -> Self {
        Self { spec, rng: stream_rng(base_seed, stream_index) }
    }

    /// Uniform on (0, 1] with 53 random bits.
    #[inline]
    fn open_closed_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    fn std_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Marsaglia–Tsang squeeze for shape ≥ 1, unit scale.
    fn gamma_unit(&mut self, shape: f64) -> f64 {
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.std_normal();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            let u = self.open_closed_unit();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }

    fn raw_draw(&mut self) -> f64 {
        match self.spec {
            DistributionSpec::Exponential { rate } => -self.open_closed_unit().ln() / rate,
            DistributionSpec::Gamma { shape, scale } => {
                if shape >= 1.0 {
                    self.gamma_unit(shape) * scale
                } else {
                    // boost: G(k) = G(k + 1) * U^(1/k)
                    let g = self.gamma_unit(shape + 1.0);
                    g * self.open_closed_unit().powf(1.0 / shape) * scale
                }
            }
            DistributionSpec::Lognormal { log_mean, log_sd } => (log_mean + log_sd * self.std_normal()).exp(),
            DistributionSpec::UniformPositive { a, b } => b - (b - a) * self.open_closed_unit(),
            DistributionSpec::TwoPoint { low, high, p_low } => {
                if self.open_closed_unit() <= p_low {
                    low
                } else {
                    high
                }
            }
        }
    }

    /// Next strictly positive, finite draw. Draws that underflow to zero or
    /// overflow (only possible for extreme Gamma/Lognormal parameters) are
    /// rejected and redrawn.
    #[inline]
    pub fn next_draw(&mut self) -> f64 {
        loop {
            let x = self.raw_draw();
            if x > 0.0 && x.is_finite() {
                return x;
            }
        }
    }
}

impl Iterator for PathSampler {
    type Item = f64;
    fn next(&mut self) -> Option<f64> {
        Some(self.next_draw())
    }
}

/// Draws with their provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePath {
    pub values: Vec<f64>,
    pub spec: DistributionSpec,
    pub base_seed: u64,
    pub stream_index: u64,
}

impl SamplePath {
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl std::ops::Deref for SamplePath {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Draws `n` values from stream `stream_index` under `base_seed`.
pub fn sample(
    spec: &DistributionSpec,
    n: usize,
    base_seed: u64,
    stream_index: u64,
) -> Result<SamplePath, DistributionError> {
    if n == 0 {
        return Err(DistributionError::ZeroLength);
    }
    let values = PathSampler::new(*spec, base_seed, stream_index).take(n).collect();
    Ok(SamplePath { values, spec: *spec, base_seed, stream_index })
}
