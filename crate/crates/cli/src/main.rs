//! `qab`: spectra, brachistochrone schedules and dynamics from the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod setup;
mod table;

use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CompareArgs, Files, SimulateArgs, SolveArgs, SpectrumArgs, SweepArgs};
use error::{input, CliError};

/// Thread count for parallel sweeps; defaults to the number of cores.
const THREADS_ENV: &str = "QAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "qab", version, about = "Open-system adiabatic schedules: spectra, brachistochrones and dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalue branches and the gap along a schedule.
    Spectrum(SpectrumArgs),
    /// Solve the brachistochrone boundary-value problem.
    Solve(SolveArgs),
    /// Propagate the master equation and report the final error.
    Simulate(SimulateArgs),
    /// Relative time gain of one schedule over another.
    Compare(CompareArgs),
    /// Final-state metrics over τ for several schedules.
    Sweep(SweepArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| input(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| input(e.to_string()))
}

fn write_all(dir: &Path, files: &Files) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    for (name, bytes) in files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (files, common) = match &cli.command {
        Command::Spectrum(a) => (commands::spectrum(a)?, &a.common),
        Command::Solve(a) => (commands::solve(a)?, &a.common),
        Command::Simulate(a) => (commands::simulate(a)?, &a.common),
        Command::Compare(a) => (commands::compare(a)?, &a.common),
        Command::Sweep(a) => (commands::sweep(a)?, &a.common),
    };
    write_all(commands::out_dir(common), &files)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
