//! `gmwmx estimate`: one series in, one JSON result out.

use std::path::{Path, PathBuf};

use clap::Args;
use gmwmx::estimators::{gmwmx, GmwmOptions, Method};
use gmwmx::io::{parse_position_file, ParseOptions};
use gmwmx::likelihood::{mle_estimate, MleOptions, DEFAULT_LIKELIHOOD_CAP};
use gmwmx::{build_design_matrix, FileFormat, FunctionalSpec, ModelFamily, OmegaKind, PosComponent, Units};
use serde::Serialize;

use crate::error::CliError;
use crate::{write_output, SCHEMA_VERSION};

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Position file (`.mom` or `.pos`).
    #[arg(long)]
    pub input: PathBuf,
    /// File dialect; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<FileFormat>,
    /// Coordinate read from `.pos` files.
    #[arg(long, default_value = "u")]
    pub component: PosComponent,
    /// Noise model as `+`-joined components: white, powerlaw, matern.
    #[arg(long, default_value = "powerlaw+white")]
    pub model: ModelFamily,
    /// gmwmx1, gmwmx2 or mle.
    #[arg(long, default_value = "gmwmx1")]
    pub method: Method,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Result file; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    pub output: PathBuf,
    /// Wavelet-variance weighting: diagonal or identity.
    #[arg(long, default_value = "diagonal")]
    pub omega: OmegaKind,
    /// Number of wavelet scales; `floor(log2 n) - 2` when omitted.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Units of the file values (mm or m), overriding any header.
    #[arg(long)]
    pub units: Option<Units>,
    /// Harmonic frequencies in cycles per year, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0])]
    pub harmonics: Vec<f64>,
    /// Reference epoch (MJD) of the intercept; the first epoch when omitted.
    #[arg(long)]
    pub t0: Option<f64>,
    /// Largest series the likelihood method accepts.
    #[arg(long, default_value_t = DEFAULT_LIKELIHOOD_CAP)]
    pub mle_cap: usize,
    /// Also write the wavelet-variance table as CSV.
    #[arg(long)]
    pub wv_csv: Option<PathBuf>,
}

/// Everything needed to rerun the estimate.
#[derive(Debug, Serialize)]
struct ResolvedConfig {
    input: String,
    format: FileFormat,
    component: PosComponent,
    units: Option<Units>,
    model: String,
    method: Method,
    alpha: f64,
    omega: OmegaKind,
    levels: usize,
    harmonics: Vec<f64>,
    t0: f64,
    offsets: Vec<f64>,
    mle_cap: usize,
}

#[derive(Debug, Serialize)]
struct FunctionalEntry {
    label: String,
    units: String,
    estimate: f64,
    std_error: f64,
    ci: (f64, f64),
}

#[derive(Debug, Serialize)]
struct StochasticEntry {
    name: String,
    value: f64,
}

#[derive(Debug, Serialize)]
struct WvRow {
    scale: usize,
    nu_hat: f64,
    nu_model: f64,
    count: usize,
    omega: f64,
}

#[derive(Debug, Serialize)]
struct Stage {
    stage: String,
    seconds: f64,
}

#[derive(Debug, Serialize)]
struct TimingOut {
    total_seconds: f64,
    stages: Vec<Stage>,
}

#[derive(Debug, Serialize)]
struct EstimateOutput {
    schema_version: &'static str,
    station: String,
    n: usize,
    first_epoch: f64,
    last_epoch: f64,
    method: Method,
    iterations: usize,
    alpha: f64,
    functional: Vec<FunctionalEntry>,
    stochastic: Vec<StochasticEntry>,
    objective_trace: Vec<f64>,
    converged: bool,
    evaluations: usize,
    /// `null` when unbounded on the zero-variance boundary.
    loglik: Option<f64>,
    boundary: bool,
    gap_fraction: f64,
    wavelet_variance: Vec<WvRow>,
    warnings: Vec<String>,
    timing: TimingOut,
    config: ResolvedConfig,
}

fn infer_format(path: &Path) -> Result<FileFormat, CliError> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("mom") => Ok(FileFormat::Mom),
        Some("pos") => Ok(FileFormat::Pos),
        _ => Err(CliError::config(format!(
            "cannot infer the format of {}; pass --format mom|pos",
            path.display()
        ))),
    }
}

pub fn run(args: &EstimateArgs) -> Result<(), CliError> {
    if !(args.alpha > 0.0 && args.alpha < 0.5) {
        return Err(CliError::config(format!("--alpha {} must lie in (0, 0.5)", args.alpha)));
    }
    let format = match args.format {
        Some(f) => f,
        None => infer_format(&args.input)?,
    };
    let bytes = std::fs::read(&args.input).map_err(|e| CliError::io(&args.input, e))?;
    let options = ParseOptions {
        component: args.component,
        units: args.units,
    };
    let ts = parse_position_file(&bytes, format, &options)?;
    let t0 = args.t0.unwrap_or(ts.epochs[0]);
    let spec = FunctionalSpec::linear(t0)
        .with_harmonics(&args.harmonics)
        .with_offsets(&ts.offsets_declared);
    let design = build_design_matrix(&ts.epochs, &spec)?;
    let gmwm = GmwmOptions {
        levels: args.levels,
        omega: args.omega,
        ..GmwmOptions::default()
    };
    let result = match args.method {
        Method::Gmwmx1 => gmwmx(&ts.values, &design, &args.model, 1, args.alpha, &gmwm)?,
        Method::Gmwmx2 => gmwmx(&ts.values, &design, &args.model, 2, args.alpha, &gmwm)?,
        Method::Mle => {
            let mle = MleOptions {
                cap: args.mle_cap,
                ..MleOptions::default()
            };
            mle_estimate(&ts.values, &design, &args.model, args.alpha, &gmwm, &mle)?
        }
    };

    let functional = (0..result.x_hat.len())
        .map(|i| FunctionalEntry {
            label: result.labels[i].clone(),
            units: result.units[i].clone(),
            estimate: result.x_hat[i],
            std_error: result.std_errors[i],
            ci: result.ci[i],
        })
        .collect();
    let stochastic = args
        .model
        .param_names()
        .into_iter()
        .zip(result.gamma_hat.params())
        .map(|(name, value)| StochasticEntry { name, value })
        .collect();
    let wv = &result.wv;
    let wavelet_variance: Vec<WvRow> = wv
        .table()
        .into_iter()
        .zip(&result.nu_model)
        .map(|((scale, nu_hat, count, omega), &nu_model)| WvRow {
            scale,
            nu_hat,
            nu_model,
            count,
            omega,
        })
        .collect();
    if let Some(path) = &args.wv_csv {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::new("io", crate::error::EXIT_IO, e.to_string()))?;
        for row in &wavelet_variance {
            w.serialize(row).map_err(|e| CliError::new("io", crate::error::EXIT_IO, e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    let output = EstimateOutput {
        schema_version: SCHEMA_VERSION,
        station: ts.station_id.clone(),
        n: ts.len(),
        first_epoch: ts.epochs[0],
        last_epoch: *ts.epochs.last().unwrap(),
        method: result.method,
        iterations: result.iterations,
        alpha: result.alpha,
        functional,
        stochastic,
        objective_trace: result.objective_trace.clone(),
        converged: result.converged,
        evaluations: result.evaluations,
        loglik: result.loglik.filter(|l| l.is_finite()),
        boundary: result.boundary,
        gap_fraction: wv.gap_fraction,
        wavelet_variance,
        warnings: result.warnings.clone(),
        timing: TimingOut {
            total_seconds: result.timing.total_seconds,
            stages: result
                .timing
                .stages
                .iter()
                .map(|(stage, seconds)| Stage {
                    stage: stage.clone(),
                    seconds: *seconds,
                })
                .collect(),
        },
        config: ResolvedConfig {
            input: args.input.display().to_string(),
            format,
            component: args.component,
            units: args.units,
            model: args.model.to_string(),
            method: args.method,
            alpha: args.alpha,
            omega: args.omega,
            levels: wv.levels(),
            harmonics: args.harmonics.clone(),
            t0,
            offsets: ts.offsets_declared.clone(),
            mle_cap: args.mle_cap,
        },
    };
    let json = serde_json::to_string_pretty(&output).expect("result serializes");
    write_output(&args.output, &json)
}
