//! `mereokit`: seeded batch experiments over tensor product structures.
//!
//! Every subcommand reads an optional JSON config, fills the gaps from flags
//! and defaults, and writes a self-describing JSON or CSV payload.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mereokit::Error;
use thiserror::Error as ThisError;

use config::Format;

pub const SEED_ENV: &str = "MEREOKIT_SEED";

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Hypothesis { .. }) => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mereokit",
    version,
    about = "Seeded experiments on tensor product structures"
)]
struct Cli {
    /// JSON config file: {"seed", "tol", "format", "out", "params"}, all optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run seed. Falls back to the config, then MEREOKIT_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Weight profile and minimal K of a Hamiltonian in a structure.
    Profile,
    /// Entropy of one site along the time-evolved structures.
    Orbit,
    /// Compare two structures through the entanglement fingerprint.
    Fingerprint,
    /// Search for a structure in which a Hamiltonian is K-local.
    Search,
    /// Orbit witness between two (H, psi) pairs or two vector families.
    Kinds,
    /// Repeated searches on scrambled instances, aggregated into one table.
    Dualscan,
}

/// Command-line overrides shared by every subcommand.
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub tol: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        config: cli.config,
        seed: cli.seed,
        out: cli.out,
        format: cli.format,
        tol: cli.tol,
    };
    let result = match cli.command {
        Command::Profile => commands::profile(&overrides),
        Command::Orbit => commands::orbit(&overrides),
        Command::Fingerprint => commands::fingerprint(&overrides),
        Command::Search => commands::search(&overrides),
        Command::Kinds => commands::kinds(&overrides),
        Command::Dualscan => commands::dualscan(&overrides),
    };
    match result {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("mereokit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
