//! Experiment configs.
//!
//! A config names one subcommand, its arguments keyed by flag name, and the
//! run-wide settings. Arguments are fed back through the command-line
//! parser, so a config and the equivalent flags are validated identically
//! and yield the same canonical config.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use xda_core::exact::DEFAULT_MAX_PRECISION;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

fn default_precision() -> u32 {
    DEFAULT_MAX_PRECISION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub command: String,
    #[serde(default)]
    pub args: Map<String, Value>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub format: Format,
    /// Where to write the artifact; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Refinement cap for exact comparisons.
    #[serde(default = "default_precision")]
    pub max_precision: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config is empty")]
    Empty,
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config names no command")]
    NoCommand,
}

impl ExperimentConfig {
    pub fn new(command: &str, args: Map<String, Value>) -> Self {
        ExperimentConfig {
            command: command.to_string(),
            args,
            seed: 0,
            format: Format::Json,
            output: None,
            max_precision: DEFAULT_MAX_PRECISION,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        if text.trim().is_empty() {
            return Err(ConfigError::Empty);
        }
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        if cfg.command.trim().is_empty() {
            return Err(ConfigError::NoCommand);
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// SHA-256 over the canonical JSON of everything that affects results.
    /// The output path is left out. Object keys are sorted, so the hash does
    /// not depend on key order in the file.
    pub fn hash(&self) -> String {
        let canonical = serde_json::json!({
            "command": self.command,
            "args": self.args,
            "seed": self.seed,
            "format": self.format,
            "max-precision": self.max_precision,
        });
        let text = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The argument list `command --key value …` for the parser. `false` and
    /// `null` drop the flag, `true` gives a bare flag and arrays are joined
    /// with commas.
    pub fn argv(&self) -> Vec<String> {
        let mut out = vec!["xda".to_string(), self.command.clone()];
        for (k, v) in &self.args {
            let flag = format!("--{k}");
            match v {
                Value::Null | Value::Bool(false) => {}
                Value::Bool(true) => out.push(flag),
                Value::Array(items) => {
                    out.push(flag);
                    out.push(items.iter().map(scalar_text).collect::<Vec<_>>().join(","));
                }
                other => {
                    out.push(flag);
                    out.push(scalar_text(other));
                }
            }
        }
        out
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
