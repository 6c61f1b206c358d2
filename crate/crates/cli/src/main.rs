//! Configuration-driven runner: single trajectories, parameter sweeps,
//! multistart optimization campaigns, and closed-form analytic tables.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
//! failures. A plasmon truncation warning is a stderr note, not an error.

mod commands;
mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use plexciton::{Error, Result};

use crate::config::KeyValues;
use crate::output::Provenance;

#[derive(Parser)]
#[command(
    name = "plexciton",
    version,
    about = "Entanglement dynamics of quantum dots coupled to a lossy plasmon mode"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one configured system; writes trajectory.csv and summary.csv.
    Simulate(RunArgs),
    /// Evaluate a 1- or 2-axis parameter grid in parallel; writes sweep.csv.
    Sweep(RunArgs),
    /// Clustered multistart optimization; writes optima.csv, log.csv, and
    /// a re-simulated trajectory per optimum.
    Optimize(RunArgs),
    /// Closed-form dark-evolution tables (ratio scan or N-scaling); writes
    /// analytic.csv.
    Analytic(RunArgs),
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Simulate(a)
            | Command::Sweep(a)
            | Command::Optimize(a)
            | Command::Analytic(a) => a,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Key-value config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// RNG seed; overrides optimize.seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Dimension { .. } => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let args = cli.command.args();
    if let Some(k) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    }
    let text = fs::read_to_string(&args.config).map_err(|e| {
        Error::config(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let mut kv = KeyValues::parse(&text)?;
    let config_seed = match &cli.command {
        Command::Optimize(_) => kv.get_usize("optimize.seed")?.map(|v| v as u64),
        _ => None,
    };
    let seed = args.seed.or(config_seed).unwrap_or(1);
    let prov = Provenance::new(&text, seed);
    match &cli.command {
        Command::Simulate(a) => commands::simulate(&mut kv, &a.out, &prov),
        Command::Sweep(a) => commands::sweep(&mut kv, &a.out, &prov),
        Command::Optimize(a) => commands::optimize(&mut kv, &a.out, &prov, seed),
        Command::Analytic(a) => commands::analytic(&mut kv, &a.out, &prov),
    }
}
