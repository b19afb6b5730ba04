use std::path::PathBuf;
use std::process::exit;

use clap::{Parser, Subcommand};
use xda::commands::Command;
use xda::config::{ExperimentConfig, Format};
use xda::{execute_with, CliError, EXIT_INVALID};

/// Exact experiments on extrinsic Diophantine approximation.
///
/// Exit codes: 0 ok, 2 invalid input, 3 a cap or budget ran out (partial
/// artifact written), 4 internal invariant violated.
#[derive(Parser)]
#[command(name = "xda", version)]
struct Cli {
    #[command(subcommand)]
    top: Top,
    /// RNG seed for commands that sample.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Artifact format.
    #[arg(long = "out", value_enum, global = true)]
    format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(short, long, global = true)]
    output: Option<String>,
    /// Refinement cap for exact comparisons.
    #[arg(long, env = "XDA_MAX_PRECISION", global = true)]
    max_precision: Option<u32>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Print the canonical config instead of running it.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand)]
enum Top {
    /// Runs an experiment config file.
    Run {
        config: PathBuf,
    },
    #[command(flatten)]
    Command(Command),
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn main() {
    let cli = Cli::parse();
    let mut config = match &cli.top {
        Top::Run { config } => match load(config) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("xda: {e}");
                exit(EXIT_INVALID);
            }
        },
        Top::Command(cmd) => ExperimentConfig::new(&cmd.name(), cmd.args()),
    };
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(f) = cli.format {
        config.format = f;
    }
    if let Some(o) = &cli.output {
        config.output = Some(o.clone());
    }
    if let Some(p) = cli.max_precision {
        config.max_precision = p;
    }
    if cli.print_config {
        match xda::canonicalize(&config) {
            Ok((_, c)) => print!("{}", c.to_json()),
            Err(e) => {
                eprintln!("xda: {e}");
                exit(e.code());
            }
        }
        return;
    }
    let rendered = match execute_with(&config, cli.workers) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("xda: {e}");
            exit(e.code());
        }
    };
    match &config.output {
        Some(path) => {
            if let Err(source) = std::fs::write(path, &rendered.text) {
                let e = CliError::Io { path: path.clone(), source };
                eprintln!("xda: {e}");
                exit(e.code());
            }
        }
        None => print!("{}", rendered.text),
    }
    exit(rendered.status.code());
}
