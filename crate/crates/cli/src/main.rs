//! Command-line driver: estimate a single series, run Monte-Carlo studies,
//! or write synthetic series.
//!
//! Failures print `{"error": {...}}` on stderr and exit with
//! 3 (parse), 4 (configuration), 5 (estimation), 6 (likelihood size cap)
//! or 7 (file system).

mod error;
mod estimate;
mod simulate;

use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::CliError;

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Parser)]
#[command(name = "gmwmx", version, about = "Trend and noise estimation for GNSS position series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the trajectory and noise model of one position series.
    ///
    /// Offsets declared in the file header apply from their own epoch onward.
    Estimate(estimate::EstimateArgs),
    /// Run a Monte-Carlo scenario and write its summary.
    Simulate(simulate::SimulateArgs),
    /// Write one synthetic replication of a scenario as a `.mom` file.
    Generate(simulate::GenerateArgs),
}

pub fn write_output(path: &Path, text: &str) -> Result<(), CliError> {
    if path.as_os_str() == "-" {
        println!("{text}");
        Ok(())
    } else {
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Estimate(args) => estimate::run(args),
        Command::Simulate(args) => simulate::run_simulate(args),
        Command::Generate(args) => simulate::run_generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code)
        }
    }
}
