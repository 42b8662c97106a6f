//! Experiment configuration: parsing, defaults, validation and hashing.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Count,
    Volume,
    Spiral,
    Verify,
    Scaling,
    Ideals,
    Presets,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Count => "count",
            Command::Volume => "volume",
            Command::Spiral => "spiral",
            Command::Verify => "verify",
            Command::Scaling => "scaling",
            Command::Ideals => "ideals",
            Command::Presets => "presets",
        }
    }
}

/// `"equal"` or a flat list: all `a_{iν}` row-major, then all `b_{jν}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsConfig {
    Named(String),
    Flat(Vec<f64>),
}

/// `"full"`, `"hemisphere:±k"` or an explicit cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CapConfig {
    Short(String),
    Cap { center: Vec<f64>, radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default = "default_field")]
    pub field: String,
    #[serde(default = "one")]
    pub m: usize,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default = "default_weights")]
    pub weights: WeightsConfig,
    /// Basis coordinates of `ϑ`, entry by entry.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    /// Seed for a uniform `ϑ` when `theta` is absent.
    #[serde(default)]
    pub theta_seed: Option<u64>,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default, rename = "T")]
    pub t: Option<f64>,
    #[serde(default, rename = "T_grid")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub caps: Option<[CapConfig; 2]>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub norm_bound: Option<f64>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_field() -> String {
    "Q".into()
}

fn one() -> usize {
    1
}

fn default_weights() -> WeightsConfig {
    WeightsConfig::Named("equal".into())
}

fn default_c() -> f64 {
    1.0
}

fn default_samples() -> usize {
    100_000
}

fn default_epsilon() -> f64 {
    0.01
}

fn default_format() -> String {
    "csv".into()
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        serde_json::from_value(serde_json::json!({ "command": command })).expect("defaults are complete")
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            invalid(format!(
                "{origin}: line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })
    }

    /// Field-level checks that do not need the number field itself.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.m == 0 || self.n == 0 {
            return Err(invalid("m, n: must be positive"));
        }
        if !(self.c >= 0.0) || !self.c.is_finite() {
            return Err(invalid(format!("c: must be finite and ≥ 0, got {}", self.c)));
        }
        if let Some(t) = self.t {
            if !(t > 0.0) || !t.is_finite() {
                return Err(invalid(format!("T: must be finite and > 0, got {t}")));
            }
        }
        if let Some(grid) = &self.t_grid {
            if grid.is_empty() {
                return Err(invalid("T_grid: must not be empty"));
            }
            if grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
                return Err(invalid("T_grid: entries must be finite and > 0"));
            }
            if grid.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(invalid("T_grid: must be strictly increasing"));
            }
        }
        if let WeightsConfig::Named(s) = &self.weights {
            if s != "equal" {
                return Err(invalid(format!("weights: expected \"equal\" or a list, got {s:?}")));
            }
        }
        if self.samples < 1000 {
            return Err(invalid(format!("samples: need at least 1000, got {}", self.samples)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(invalid("epsilon: must be ≥ 0"));
        }
        if self.workers == Some(0) {
            return Err(invalid("workers: must be positive"));
        }
        crate::report::Format::parse(&self.format)?;
        match self.command {
            Command::Count | Command::Volume | Command::Spiral if self.t.is_none() => {
                Err(invalid(format!("T: required for {}", self.command.name())))
            }
            Command::Scaling if self.t_grid.is_none() => Err(invalid("T_grid: required for scaling")),
            Command::Ideals if self.norm_bound.is_none() => Err(invalid("norm_bound: required for ideals")),
            _ => Ok(()),
        }
    }

    /// SHA-256 of the canonical JSON of every field except `out`,
    /// `format` and `workers`.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serialises");
        let obj = v.as_object_mut().expect("config is an object");
        for key in ["out", "format", "workers"] {
            obj.remove(key);
        }
        let canonical = serde_json::to_string(&v).expect("value serialises");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}
