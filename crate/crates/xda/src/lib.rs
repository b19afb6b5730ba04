//! Exact experiments on extrinsic Diophantine approximation, driven by
//! configs or flags and written as JSON or CSV artifacts.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod parallel;
pub mod point;
pub mod report;
pub mod system;

use clap::Parser;

use crate::commands::{Command, Ctx, Fail};
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{Artifact, Status, Table};

/// Exit code for bad input or an unusable config.
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Invariant(_) => Status::Invariant.code(),
            _ => EXIT_INVALID,
        }
    }
}

/// A finished run.
#[derive(Clone, Debug)]
pub struct Rendered {
    pub text: String,
    pub status: Status,
    /// The config with every argument spelled out.
    pub config: ExperimentConfig,
}

#[derive(Parser)]
#[command(name = "xda")]
struct ArgsOnly {
    #[command(subcommand)]
    command: Command,
}

/// Re-parses a config's arguments exactly as flags would be parsed and
/// returns the command with the canonical config.
pub fn canonicalize(config: &ExperimentConfig) -> Result<(Command, ExperimentConfig), CliError> {
    let parsed = ArgsOnly::try_parse_from(config.argv()).map_err(|e| CliError::Usage(e.render().to_string()))?;
    let command = parsed.command;
    let canonical = ExperimentConfig { command: command.name(), args: command.args(), ..config.clone() };
    Ok((command, canonical))
}

/// Runs a config on the current rayon pool.
pub fn execute(config: &ExperimentConfig) -> Result<Rendered, CliError> {
    let (command, config) = canonicalize(config)?;
    let ctx = Ctx { precision: config.max_precision, seed: config.seed };
    let artifact = match commands::run(&command, &ctx) {
        Ok(a) => a,
        Err(Fail::Exhausted(msg)) => {
            let mut a = Artifact::new(Table::new("exhausted", &[]));
            a.set("error", msg.clone().into());
            a.degrade(Status::Exhausted, msg);
            a
        }
        Err(Fail::Invalid(msg)) => return Err(CliError::Invalid(msg)),
        Err(Fail::Invariant(msg)) => return Err(CliError::Invariant(msg)),
    };
    Ok(Rendered { text: report::render(&config, &artifact), status: artifact.status, config })
}

/// Runs a config on a dedicated pool of `workers` threads, or on the
/// global pool when `None`. Output never depends on the worker count.
pub fn execute_with(config: &ExperimentConfig, workers: Option<usize>) -> Result<Rendered, CliError> {
    match workers {
        None => execute(config),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| CliError::Invalid(format!("cannot start {n} workers: {e}")))?;
            pool.install(|| execute(config))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::{json, Value};

    fn cfg(v: Value) -> ExperimentConfig {
        ExperimentConfig::from_json(&v.to_string()).unwrap()
    }

    #[test]
    fn defaults_are_filled_in() {
        let (_, c) = canonicalize(&cfg(json!({"command": "cf", "args": {"point": "quad:(0+1*sqrt(2))"}}))).unwrap();
        assert_eq!(c.args["terms"], json!(10));
        let (_, again) = canonicalize(&c).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn bad_configs_are_usage_errors() {
        for v in [
            json!({"command": "nope"}),
            json!({"command": "cf"}),
            json!({"command": "cf", "args": {"point": "1/3", "bogus": 1}}),
            json!({"command": "cf", "args": {"point": "1/3", "terms": "many"}}),
        ] {
            let e = execute(&cfg(v.clone())).unwrap_err();
            assert_eq!(e.code(), 2, "{v}");
        }
    }

    #[test]
    fn exhausted_runs_still_render() {
        let c = cfg(json!({"command": "goodpair", "args": {"point": "quad:(0+1*sqrt(2))", "min-q0": 1000, "cap": 10}}));
        let r = execute(&c).unwrap();
        assert_eq!(r.status, Status::Exhausted);
        let v: Value = serde_json::from_str(&r.text).unwrap();
        assert_eq!(v["header"]["status"], "exhausted");
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let c = cfg(json!({"command": "goodpair", "args": {"point": "quad:(0+1*sqrt(2)),quad:(0+1*sqrt(3))", "min-q0": 100000}}));
        let one = execute_with(&c, Some(1)).unwrap().text;
        for n in [2, 5] {
            assert_eq!(execute_with(&c, Some(n)).unwrap().text, one);
        }
    }
}
