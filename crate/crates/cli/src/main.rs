mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{FileConfig, FlagOverrides, RunConfig};
use error::CliError;
use ies_sched::sim::Method;

#[derive(Debug, Parser)]
#[command(name = "ies-sched", version, about = "Day-ahead scheduling of an integrated electricity and heat system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    /// Number of evaluation days to generate or simulate.
    #[arg(long, global = true)]
    days: Option<usize>,
    /// Size of the augmented forecast pool.
    #[arg(long, global = true)]
    pool: Option<usize>,
    #[arg(long, global = true)]
    error_cap: Option<f64>,
    /// Six EVs, four TESs and 20% more heat demand.
    #[arg(long, global = true)]
    large: bool,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate base days, the forecast pool, the error pool and the evaluation month.
    GenData,
    /// Train the neural scheduler on the generated data.
    Train,
    /// Write day-ahead schedules.
    Schedule {
        #[arg(long, default_value = "neural")]
        method: Method,
        /// Forecast CSV; defaults to the evaluation forecasts.
        #[arg(long)]
        forecast: Option<PathBuf>,
        /// Realised-value CSV for the ideal method.
        #[arg(long)]
        actual: Option<PathBuf>,
        /// One-based evaluation day; all days when omitted.
        #[arg(long)]
        day: Option<usize>,
    },
    /// Settle schedules against the realised values.
    Simulate {
        /// Method to run; all three when omitted.
        #[arg(long)]
        method: Option<Method>,
    },
    /// Hourly, daily, monthly, category and comparison tables.
    Report,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let c = &cli.common;
    let flags = FlagOverrides {
        seed: c.seed,
        epochs: c.epochs,
        days: c.days,
        pool: c.pool,
        error_cap: c.error_cap,
        large: c.large,
        out: c.out.clone(),
    };
    let rc = RunConfig::resolve(file, flags)?;
    match cli.command {
        Command::GenData => commands::gen_data(&rc),
        Command::Train => commands::train(&rc),
        Command::Schedule { method, forecast, actual, day } => {
            commands::schedule(&rc, method, forecast.as_deref(), actual.as_deref(), day)
        }
        Command::Simulate { method } => commands::simulate(&rc, method),
        Command::Report => commands::report(&rc),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
