use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ofdm_phn_cli::{cmd_single, cmd_sweep, cmd_trace, filter_estimators, parse_config, CliError};

/// Monte Carlo driver for joint phase-noise and channel estimation.
#[derive(Parser)]
#[command(name = "ofdm-phn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the key-value config file.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's master_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's worker count (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated estimator filter applied to the config's list.
    #[arg(long)]
    estimators: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full scenario grid and write aggregate statistics.
    Sweep(CommonArgs),
    /// Write the per-iteration convergence trace of a single-cell config.
    Trace(CommonArgs),
    /// Write per-sample phase estimates for one trial of a single-cell config.
    Single(CommonArgs),
}

fn run(args: &CommonArgs, body: fn(&ofdm_phn_cli::RunConfig) -> Result<String, CliError>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(workers) = args.workers {
        config.workers = workers;
    }
    if let Some(filter) = &args.estimators {
        config.estimators = filter_estimators(&config.estimators, filter)?;
    }
    let csv = body(&config)?;
    match &args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(args) => run(args, cmd_sweep),
        Command::Trace(args) => run(args, cmd_trace),
        Command::Single(args) => run(args, cmd_single),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
