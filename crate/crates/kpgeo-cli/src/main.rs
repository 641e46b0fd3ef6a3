//! `kpgeo`: batch runner for geodesic solves and the verification suite.

mod config;
mod error;
mod modes;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "kpgeo", version, about = "Geodesics of Kähler potentials on a flat torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the pipeline selected by the config's `mode`.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the acceptance batteries.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Restrict to one module, criterion name or criterion number.
        #[arg(long)]
        only: Option<String>,
    },
}

fn init_threads(cfg: &RunConfig) -> Result<(), CliError> {
    let from_env = std::env::var("KPGEO_THREADS").ok().and_then(|s| s.parse::<usize>().ok());
    if let Some(n) = from_env.or(cfg.thread_count) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Other(e.to_string()))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (path, only) = match &cli.command {
        Command::Run { config } => (config, None),
        Command::Verify { config, only } => (config, Some(only.as_deref())),
    };
    let cfg = RunConfig::load(path)?;
    init_threads(&cfg)?;
    let report = match only {
        None => modes::run(&cfg)?,
        Some(only) => {
            std::fs::create_dir_all(&cfg.output_dir)?;
            let r = modes::verify(&cfg, only)?;
            r.write(&cfg.output_dir)?;
            r
        }
    };
    eprintln!("report written to {}", cfg.output_dir.join("report.json").display());
    report.outcome()
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kpgeo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
