//! JSON run configurations. Each subcommand resolves its flags (on top of an
//! optional `--config` file) into one of these; `--emit-config` writes the
//! resolved value back out.

use std::fs;
use std::path::Path;

use prodsum::{DistributionSpec, StatisticKind};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_EXACT_CUTOFF: usize = 2000;
pub const DEFAULT_SAMPLES: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AscltConfig {
    pub spec: DistributionSpec,
    pub kind: StatisticKind,
    #[serde(rename = "N")]
    pub horizon: usize,
    #[serde(rename = "baseSeed")]
    pub base_seed: u64,
    #[serde(rename = "exactCutoff")]
    pub exact_cutoff: usize,
    /// Evaluation points; the law's 19 quantile grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SllnConfig {
    pub spec: DistributionSpec,
    #[serde(rename = "nList")]
    pub n_list: Vec<usize>,
    #[serde(rename = "baseSeed")]
    pub base_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityConfig {
    pub spec: DistributionSpec,
    pub n: usize,
    pub reps: usize,
    #[serde(rename = "baseSeed")]
    pub base_seed: u64,
    #[serde(rename = "muOverride", default, skip_serializing_if = "Option::is_none")]
    pub mu_override: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistTableConfig {
    pub specs: Vec<DistributionSpec>,
    pub samples: usize,
    #[serde(rename = "baseSeed")]
    pub base_seed: u64,
}

fn one() -> usize {
    1
}

pub fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("config types serialize infallibly")
}

pub fn write_config<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    fs::write(path, to_json(value) + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
