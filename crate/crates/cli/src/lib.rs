//! Command-line front end for `sh2d-core`: strict JSON configuration,
//! experiment orchestration and reproducible output directories.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 quality failure
//! (non-convergence, failed suite, numerical failure), 3 diagnostic blow-up.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use thiserror::Error;

pub use config::{ConfigError, LoadedConfig, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "sh2d", version, about = "Singular Hartree equation with a point interaction in 2D")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Minimise the Weinstein functional.
    Groundstate,
    /// Integrate the time-dependent equation.
    Evolve,
    /// Discrete bound state against the continuum eigenvalue.
    Spectrum,
    /// Randomised inequality suites.
    Verify,
    /// Gagliardo–Nirenberg constant estimate.
    Gn,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Groundstate => "groundstate",
            Self::Evolve => "evolve",
            Self::Spectrum => "spectrum",
            Self::Verify => "verify",
            Self::Gn => "gn",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(ConfigError),
    #[error("{0}")]
    Io(String),
    #[error("computation failed: {0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => 1,
            Self::Compute(_) => 2,
        }
    }
}

/// Exit code plus the summary lines printed to stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub lines: Vec<String>,
}

impl Outcome {
    pub fn new(code: i32, lines: Vec<String>) -> Self {
        Self { code, lines }
    }

    pub fn ok(lines: Vec<String>) -> Self {
        Self::new(0, lines)
    }
}

/// Loads the config, resolves seed and output directory, and runs.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = LoadedConfig::load(&cli.config).map_err(CliError::Config)?;
    let seed = cli.seed.or(cfg.config.seed).unwrap_or(0);
    let out = match (&cli.output, &cfg.config.output_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => cfg.resolve(o),
        (None, None) => Path::new("sh2d-out").join(cli.command.name()),
    };
    commands::execute(cli.command, &cfg, seed, &out)
}
