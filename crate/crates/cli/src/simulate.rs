//! `gmwmx simulate` and `gmwmx generate`.

use std::path::{Path, PathBuf};

use clap::Args;
use gmwmx::io::write_mom;
use gmwmx::simulation::{run_monte_carlo, simulate_replication};
use gmwmx::ScenarioConfig;
use serde::Serialize;

use crate::error::CliError;
use crate::{write_output, SCHEMA_VERSION};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Replications; overrides the scenario.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Base seed; overrides the scenario.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "GMWMX_WORKERS", default_value_t = 1)]
    pub workers: usize,
    /// Directory receiving `summary.json`, `summary.csv` and `timing.json`.
    #[arg(long)]
    pub output: PathBuf,
    /// Also write every replication to `reps.jsonl`.
    #[arg(long)]
    pub dump_reps: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Scenario file (TOML); the nominal scenario when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Replication index within the scenario.
    #[arg(long, default_value_t = 0)]
    pub rep: usize,
    /// Base seed; overrides the scenario.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Destination `.mom` file; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    pub output: PathBuf,
}

fn load_scenario(path: Option<&Path>) -> Result<ScenarioConfig, CliError> {
    match path {
        None => Ok(ScenarioConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Ok(ScenarioConfig::from_toml(&text)?)
        }
    }
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    schema_version: &'static str,
    #[serde(flatten)]
    summary: &'a gmwmx::McSummary,
    config: &'a ScenarioConfig,
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn run_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut config = load_scenario(Some(&args.scenario))?;
    if let Some(reps) = args.reps {
        config.n_reps = reps;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.workers == 0 {
        return Err(CliError::config("--workers must be at least 1"));
    }
    config.validate()?;
    std::fs::create_dir_all(&args.output).map_err(|e| CliError::io(&args.output, e))?;
    let run = run_monte_carlo(&config, args.workers)?;
    let summary = SummaryFile {
        schema_version: SCHEMA_VERSION,
        summary: &run.summary,
        config: &config,
    };
    write_file(
        &args.output.join("summary.json"),
        &serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    write_file(&args.output.join("summary.csv"), &run.summary.to_csv())?;
    write_file(
        &args.output.join("timing.json"),
        &serde_json::to_string_pretty(&run.timing).expect("timing serializes"),
    )?;
    if args.dump_reps {
        let lines: Vec<String> = run
            .records
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serializes"))
            .collect();
        write_file(&args.output.join("reps.jsonl"), &(lines.join("\n") + "\n"))?;
    }
    for m in &run.summary.methods {
        if let Some(b) = m.param("b") {
            eprintln!(
                "{}: {} ok, {} failed; b bias {:.4} rmse {:.4} coverage {:.3}",
                m.method,
                m.succeeded,
                m.failed,
                b.bias,
                b.rmse,
                b.coverage.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}

pub fn run_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let mut config = load_scenario(args.scenario.as_deref())?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    let (ts, _) = simulate_replication(&config, args.rep)?;
    write_output(&args.output, &write_mom(&ts))
}
