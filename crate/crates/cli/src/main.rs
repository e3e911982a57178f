use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jsloss::par::{cap_workers, Exec};

mod commands;
mod config;
mod error;

use config::{Axis, ExperimentConfig};
use error::{CliError, Result};

/// Caps the number of worker threads.
const WORKERS_ENV: &str = "JSLOSS_WORKERS";

#[derive(Parser)]
#[command(name = "jsloss", version, about = "JS/GJS loss verification and noisy-label training")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites: bounds, decomposition, gradients, limits, risk-theorem, asym-conditions or all.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Divide JS-family losses by this constant in the bounds suite (fault injection).
        #[arg(long)]
        fault_z: Option<f64>,
        #[arg(long)]
        sequential: bool,
    },
    /// Train one configuration.
    Train { config: PathBuf },
    /// Train one configuration per value of a single axis.
    Sweep {
        config: PathBuf,
        /// Overrides `sweep.axis`: pi1, M, eta or jitter.
        #[arg(long)]
        axis: Option<String>,
        /// Overrides `sweep.values`.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Print realized label-noise statistics for a configuration.
    NoiseInspect {
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{WORKERS_ENV} = `{v}` is not a positive integer"))),
        },
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = workers_from_env()? {
        cap_workers(n);
    }
    match cli.command {
        Command::Verify { suite, seed, report, fault_z, sequential } => {
            let exec = if sequential { Exec::Sequential } else { Exec::Parallel };
            commands::verify(&commands::VerifyArgs { selector: suite, seed, exec, fault_z, report })?;
        }
        Command::Train { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let run = commands::train(&cfg)?;
            if let Some(m) = run.metrics.last() {
                println!(
                    "{} epochs, final val {:.4}, best val {:.4}; wrote {}",
                    m.epoch,
                    m.val_acc,
                    run.best_val().unwrap_or(f64::NAN),
                    run.dir.display()
                );
            }
        }
        Command::Sweep { config, axis, values } => {
            let cfg = ExperimentConfig::load(&config)?;
            let axis = match (axis, &cfg.sweep) {
                (Some(a), _) => a.parse::<Axis>()?,
                (None, Some(s)) => s.axis,
                (None, None) => return Err(CliError::Config("no sweep axis: set [sweep] axis or pass --axis".into())),
            };
            let values = match (values, &cfg.sweep) {
                (Some(v), _) => v,
                (None, Some(s)) => s.values.clone(),
                (None, None) => return Err(CliError::Config("no sweep values: set [sweep] values or pass --values".into())),
            };
            commands::sweep(&cfg, axis, &values)?;
        }
        Command::NoiseInspect { config, json } => {
            let cfg = ExperimentConfig::load(&config)?;
            commands::noise_inspect(&cfg, json)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
