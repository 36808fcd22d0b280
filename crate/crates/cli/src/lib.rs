//! Experiment runner: argument parsing, config resolution, subcommands,
//! machine-readable outputs and SVG drawings.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;
pub mod verify;

use std::path::PathBuf;

use clap::Parser;
use serde::de::DeserializeOwned;
use serde::Serialize;

use commands::{Command, Outcome};
use config::{merge, resolve, ExperimentConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] ustlab_core::Error),
}

impl CliError {
    /// 1 for a failed invariant, 2 for bad input or I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invariant(_) | CliError::Core(ustlab_core::Error::Invariant(_)) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ustlab", version, about = "Spanning-tree dynamics experiments")]
pub struct Cli {
    /// JSON or TOML experiment file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run seed [default: $USTLAB_SEED, then 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it [default: 1]
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory [default: ustlab-out]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

fn overlay<T: Serialize + DeserializeOwned>(flags: &T, file: &ExperimentConfig) -> Result<T, CliError> {
    merge(flags, &file.params)
}

/// Parses, resolves and runs one command.
pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    let file = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let run = resolve(cli.seed, cli.workers, cli.out.clone(), &file)?;
    let cmd = match &cli.command {
        Command::SampleUst(a) => Command::SampleUst(overlay(a, &file)?),
        Command::Cut(a) => Command::Cut(overlay(a, &file)?),
        Command::Structure(a) => Command::Structure(overlay(a, &file)?),
        Command::Glue(a) => Command::Glue(overlay(a, &file)?),
        Command::Exponents(a) => Command::Exponents(overlay(a, &file)?),
        Command::Verify(a) => Command::Verify(overlay(a, &file)?),
        Command::Render(a) => Command::Render(overlay(a, &file)?),
    };
    output::prepare_dir(&run.out)?;
    commands::dispatch(&cmd, &run)
}

/// Entry point behind the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let name = cli.command.name();
    match run(cli) {
        Ok(out) => {
            for line in &out.report {
                println!("{line}");
            }
            if out.passed {
                0
            } else {
                eprintln!("{name}: some checks failed");
                1
            }
        }
        Err(e) => {
            eprintln!("{name}: {e}");
            e.exit_code()
        }
    }
}
