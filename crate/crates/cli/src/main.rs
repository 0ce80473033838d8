//! `shared-steer`: simulate shared steering, sweep the evaluation scenarios,
//! generate synthetic driver data and identify driver parameters.
//!
//! Exit codes: 0 success, 1 output I/O failure, 2 configuration error,
//! 3 simulation divergence, 4 data error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use steer_core::Reliance;

#[derive(Debug, Parser)]
#[command(name = "shared-steer", version, about)]
pub struct Cli {
    /// Configuration file (sectioned key = value). Built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory. The SHARED_STEER_OUT environment variable takes precedence.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one closed-loop simulation and write the log and metrics.
    Simulate {
        #[command(flatten)]
        run: RunOverrides,
    },
    /// Run the driver x reliance evaluation grid.
    Scenario { preset: Preset },
    /// Identify driver parameters from a dataset CSV.
    Identify {
        dataset: PathBuf,
        #[arg(long)]
        multistart: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Simulate a driver and write an identification dataset CSV.
    GenData {
        #[command(flatten)]
        run: RunOverrides,
        /// Ground-truth driver: `preset` (the config's driver), `table5:<row>`
        /// (manual subject) or `table6:<row>` (haptic subject), rows 1-14.
        #[arg(long, default_value = "preset")]
        theta: String,
        /// Standard deviation of white noise added to T_d (N·m).
        #[arg(long)]
        noise_sigma: Option<f64>,
        /// Noise seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunOverrides {
    /// Reliance preset: high, mid, low or manual.
    #[arg(long)]
    pub reliance: Option<Reliance>,
    /// Evaluation driver 1-3 (processing delay 0.1, 0.3, 0.5 s).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub driver: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Reliance grid without failure.
    Fig8,
    /// Reliance grid with guidance failure at 70 s and 1 s driver response.
    Fig9,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
