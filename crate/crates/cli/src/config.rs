//! Run configuration: schema version 1, unknown keys rejected.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::format::{GridJson, KernelJson, MultiplierJson};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Curvature deviation accepted by the isomorphism test.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iso: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub additivity: Option<f64>,
    /// Smallest acceptable corona bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corona: Option<f64>,
    /// Residual accepted for `psi theta = I` on the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Side file for the per-point table when the report is JSON.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_point: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorPolicyName {
    #[default]
    Abort,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarlesonConfig {
    #[serde(default = "default_levels")]
    pub levels: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angular: Option<usize>,
}

fn default_levels() -> u32 {
    8
}

impl Default for CarlesonConfig {
    fn default() -> Self {
        CarlesonConfig { levels: default_levels(), r_max: None, radial: None, angular: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_degrees")]
    pub degrees: Vec<usize>,
    /// Sample points `[re, im]`, each with `|w| <= 0.6`.
    #[serde(default = "default_oracle_points")]
    pub points: Vec<[f64; 2]>,
}

fn default_degrees() -> Vec<usize> {
    vec![12, 24, 48]
}

fn default_oracle_points() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0], [0.3, 0.0], [-0.2, 0.4], [0.0, -0.55]]
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { degrees: default_degrees(), points: default_oracle_points() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelJson>,
    /// Building blocks compared by `cross-kernel`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<Vec<KernelJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<MultiplierJson>,
    /// The pair compared by `iso-test` and `cross-kernel`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multipliers: Option<Vec<MultiplierJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<MultiplierJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridJson>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub error_policy: ErrorPolicyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carleson: Option<CarlesonConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
}

impl RunConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| {
            anyhow!("{}:{}:{}: {}", origin.display(), e.line(), e.column(), strip_position(&e.to_string()))
        })?;
        if config.schema != SCHEMA_VERSION {
            bail!("{}: unsupported schema {} (expected {SCHEMA_VERSION})", origin.display(), config.schema);
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        RunConfig::parse(&text, path)
    }

    /// SHA-256 of the canonical re-serialization, so formatting and key
    /// order in the file do not matter.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

/// serde_json appends " at line L column C"; the position is reported
/// separately.
fn strip_position(msg: &str) -> &str {
    msg.rfind(" at line ").map_or(msg, |i| &msg[..i])
}
