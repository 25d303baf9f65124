//! `hardyopt`: builds optimal Hardy and Rellich weights on radial model
//! domains and runs the numerical optimality checks from a JSON config.
//!
//! Exit codes: 0 success, 2 configuration or output error, 3 violated
//! precondition of an operation, 4 numerical non-convergence.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hardyopt_core::Exec;

use crate::config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Output(String),
    #[error("precondition failed: {0}")]
    Precondition(hardyopt_core::Error),
    #[error("numerical failure: {0}")]
    Numerical(hardyopt_core::Error),
}

impl From<hardyopt_core::Error> for CliError {
    fn from(e: hardyopt_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Precondition(e)
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hardyopt", version, about = "Optimal Hardy and Rellich weights on radial model domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory; overrides `output_dir` in the config
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// random seed; overrides `seed` in the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// suppress the summary on stdout
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// tabulate a weight and its ground state
    Weight,
    /// best constant, null sequence and band masses of a construction
    Verify,
    /// energies of the logarithmic cutoff sequence
    NullSeq,
    /// flux constancy and both coarea identities
    CoareaCheck,
    /// Rellich-type inequality over a random bump family
    Rellich,
    /// one-dimensional probe of the end behaviour
    ProbeOptimality,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Weight => "weight",
            Command::Verify => "verify",
            Command::NullSeq => "null-seq",
            Command::CoareaCheck => "coarea-check",
            Command::Rellich => "rellich",
            Command::ProbeOptimality => "probe-optimality",
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("HARDYOPT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("HARDYOPT_THREADS must be a positive integer, got {raw:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let exec = if Exec::parallel_available() { Exec::Parallel } else { Exec::Sequential };
    let outcome = match cli.command {
        Command::Weight => commands::weight(&cfg)?,
        Command::Verify => commands::verify(&cfg, exec)?,
        Command::NullSeq => commands::null_seq(&cfg)?,
        Command::CoareaCheck => commands::coarea(&cfg)?,
        Command::Rellich => commands::rellich(&cfg, exec)?,
        Command::ProbeOptimality => commands::probe(&cfg)?,
    };
    output::write_all(&out, &outcome.artifacts)?;
    if !cli.quiet {
        println!("{}: {}", cli.command.name(), outcome.summary);
        for a in &outcome.artifacts {
            println!("  wrote {}", out.join(&a.name).display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hardyopt {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
