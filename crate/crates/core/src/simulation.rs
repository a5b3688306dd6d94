//! Synthetic position series and the Monte-Carlo harness that measures
//! bias, spread, RMSE and interval coverage of the estimators.
//!
//! Every replication draws from its own ChaCha stream keyed by the scenario
//! seed and the replication index, so results do not depend on how the
//! replications are scheduled across workers.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::estimators::{gmwmx, z_quantile, EstimationResult, GmwmOptions, Method};
use crate::functional::{build_design_matrix, evaluate_mean, seasonal_coefficients, FunctionalSpec, DAYS_PER_YEAR};
use crate::io::TimeSeries;
use crate::likelihood::{mle_estimate, MleOptions};
use crate::linalg::toeplitz_color;
use crate::stochastic::{ModelFamily, StochasticModel};

pub const DEFAULT_SIMULATION_CAP: usize = 16384;
/// Largest tolerated share of failed replications per method.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;
/// Length in years of one offset block.
const OFFSET_BLOCK_YEARS: f64 = 5.0;

const STREAM_NOISE: u64 = 0;
const STREAM_OFFSETS: u64 = 1;
const STREAM_GAPS: u64 = 2;

/// Estimators the harness can run; `truth` returns the true parameters and
/// exists to audit the harness itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMethod {
    Gmwmx1,
    Gmwmx2,
    Mle,
    Truth,
}

impl SimMethod {
    pub fn name(self) -> &'static str {
        match self {
            SimMethod::Gmwmx1 => "gmwmx1",
            SimMethod::Gmwmx2 => "gmwmx2",
            SimMethod::Mle => "mle",
            SimMethod::Truth => "truth",
        }
    }
}

impl fmt::Display for SimMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("truth") {
            return Ok(SimMethod::Truth);
        }
        Ok(match Method::from_str(s)? {
            Method::Gmwmx1 => SimMethod::Gmwmx1,
            Method::Gmwmx2 => SimMethod::Gmwmx2,
            Method::Mle => SimMethod::Mle,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Span in years of daily sampling; `n = round(365.25 * years)`.
    pub years: f64,
    /// Explicit sample count overriding `years`.
    pub n: Option<usize>,
    /// Epoch of the first sample in days; also the reference epoch `t0`.
    pub start_epoch: f64,
    /// Intercept in mm.
    pub intercept: f64,
    /// Velocity in mm/yr.
    pub trend: f64,
    /// Annual amplitude in mm.
    pub amplitude: f64,
    /// Annual phase in days.
    pub phase_days: f64,
    /// Offsets per complete five-year block.
    pub offsets_per_5yr: usize,
    /// Standard deviation of offset amplitudes in mm.
    pub offset_sd: f64,
    /// True noise model.
    pub noise: StochasticModel,
    /// Estimated noise family; the truth family when absent.
    pub model: Option<ModelFamily>,
    /// Harmonic frequencies (cycles per year) in the estimation design.
    pub harmonics: Vec<f64>,
    pub gap_fraction: f64,
    pub n_reps: usize,
    pub seed: u64,
    pub alpha: f64,
    pub methods: Vec<SimMethod>,
    pub gmwm: GmwmOptions,
    pub mle: MleOptions,
    /// Largest simulated grid.
    pub cap: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "nominal".into(),
            years: 10.0,
            n: None,
            start_epoch: 51544.0,
            intercept: 0.0,
            trend: 5.0,
            amplitude: 2.5,
            phase_days: 145.0,
            offsets_per_5yr: 0,
            offset_sd: 10.0,
            noise: StochasticModel::power_law(10.0, 0.4).plus(&StochasticModel::white(15.0)),
            model: None,
            harmonics: vec![1.0],
            gap_fraction: 0.0,
            n_reps: 500,
            seed: 1,
            alpha: 0.05,
            methods: vec![SimMethod::Gmwmx1],
            gmwm: GmwmOptions::default(),
            mle: MleOptions::default(),
            cap: DEFAULT_SIMULATION_CAP,
        }
    }
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    /// Parses a TOML scenario; errors carry the offending field path.
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| config_error("", e.message().to_string()))?;
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { String::new() } else { path };
            config_error(&path, e.into_inner().message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_none() && !(self.years.is_finite() && self.years > 0.0) {
            return Err(config_error("years", "span must be positive"));
        }
        if !self.start_epoch.is_finite() {
            return Err(config_error("start_epoch", "must be finite"));
        }
        for (path, v) in [
            ("intercept", self.intercept),
            ("trend", self.trend),
            ("amplitude", self.amplitude),
            ("phase_days", self.phase_days),
        ] {
            if !v.is_finite() {
                return Err(config_error(path, "must be finite"));
            }
        }
        if !(self.offset_sd.is_finite() && self.offset_sd >= 0.0) {
            return Err(config_error("offset_sd", "must be non-negative"));
        }
        if self.noise.components.is_empty() {
            return Err(config_error("noise", "at least one component is required"));
        }
        for (i, c) in self.noise.components.iter().enumerate() {
            c.validate().map_err(|e| config_error(&format!("noise[{i}]"), e.to_string()))?;
        }
        if !(0.0..1.0).contains(&self.gap_fraction) {
            return Err(config_error("gap_fraction", "must lie in [0, 1)"));
        }
        if self.n_reps == 0 {
            return Err(config_error("n_reps", "at least one replication is required"));
        }
        z_quantile(self.alpha).map_err(|e| config_error("alpha", e.to_string()))?;
        if self.methods.is_empty() {
            return Err(config_error("methods", "at least one method is required"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(config_error(&format!("methods[{i}]"), format!("`{m}` is repeated")));
            }
        }
        for (i, f) in self.harmonics.iter().enumerate() {
            if !(f.is_finite() && *f > 0.0) {
                return Err(config_error(&format!("harmonics[{i}]"), "must be positive"));
            }
        }
        let n = self.len();
        if n < 2 {
            return Err(config_error("years", "fewer than two samples"));
        }
        if n > self.cap {
            return Err(Error::SimulationCap { n, cap: self.cap });
        }
        Ok(())
    }

    /// Number of samples on the full grid.
    pub fn len(&self) -> usize {
        self.n.unwrap_or_else(|| (DAYS_PER_YEAR * self.years).round() as usize)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn family(&self) -> ModelFamily {
        self.model.clone().unwrap_or_else(|| self.noise.family())
    }

    /// Offset count per replication.
    pub fn n_offsets(&self) -> usize {
        self.offset_blocks().len() * self.offsets_per_5yr
    }

    fn offset_blocks(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let block = (OFFSET_BLOCK_YEARS * DAYS_PER_YEAR).round() as usize;
        (0..n / block).map(|k| (k * block, ((k + 1) * block).min(n))).collect()
    }

    /// True `(label, value)` pairs of the estimation design, offsets
    /// excluded.
    fn functional_truth(&self) -> Vec<(String, f64)> {
        let mut out = vec![("a".to_string(), self.intercept), ("b".to_string(), self.trend)];
        for (h, f) in self.harmonics.iter().enumerate() {
            let (c, d) = if *f == 1.0 {
                seasonal_coefficients(self.amplitude, self.phase_days)
            } else {
                (0.0, 0.0)
            };
            out.push((format!("c{}", h + 1), c));
            out.push((format!("d{}", h + 1), d));
        }
        out
    }
}

fn stream(seed: u64, rep: usize, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((rep as u64) << 2) | purpose);
    rng
}

/// Exact zero-mean Gaussian draw with covariance `Σ(model)` on `n`
/// consecutive days.
pub fn simulate_noise(model: &StochasticModel, n: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    model.validate()?;
    if model.components.iter().all(|c| c.sigma2() == 0.0) {
        return Ok(vec![0.0; n]);
    }
    let acvf = model.autocovariances(n.saturating_sub(1))?;
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    toeplitz_color(&acvf, &z)
}

/// Parameters used to generate one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    /// Functional parameters in estimation-design order, offsets included.
    pub labels: Vec<String>,
    pub x: Vec<f64>,
    pub noise: StochasticModel,
    pub offset_epochs: Vec<f64>,
}

impl Truth {
    pub fn value(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.x[i])
    }
}

/// Full-grid series of replication `rep` before gaps are applied.
pub fn simulate_series(config: &ScenarioConfig, rep: usize) -> Result<(TimeSeries, Truth)> {
    config.validate()?;
    let n = config.len();
    let epochs: Vec<f64> = (0..n).map(|i| config.start_epoch + i as f64).collect();

    let mut off_rng = stream(config.seed, rep, STREAM_OFFSETS);
    let amp = Normal::new(0.0, config.offset_sd).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut offsets: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in config.offset_blocks() {
        // interior days of the block that are also interior to the span
        let first = (lo + 1).max(1);
        let last = (hi - 1).min(n - 2);
        let slots = last.saturating_sub(first) + 1;
        if last < first || slots < config.offsets_per_5yr {
            return Err(config_error("offsets_per_5yr", "more offsets than days in a block"));
        }
        let mut days: Vec<usize> = sample(&mut off_rng, slots, config.offsets_per_5yr)
            .into_iter()
            .map(|k| first + k)
            .collect();
        days.sort_unstable();
        for d in days {
            offsets.push((epochs[d], amp.sample(&mut off_rng)));
        }
    }

    let offset_epochs: Vec<f64> = offsets.iter().map(|o| o.0).collect();
    let spec = FunctionalSpec::linear(config.start_epoch)
        .with_harmonics(&config.harmonics)
        .with_offsets(&offset_epochs);
    let design = build_design_matrix(&epochs, &spec)?;
    let mut labels = Vec::new();
    let mut x = Vec::new();
    for (l, v) in config.functional_truth() {
        labels.push(l);
        x.push(v);
    }
    for (k, o) in offsets.iter().enumerate() {
        labels.push(format!("g{}", k + 1));
        x.push(o.1);
    }
    let mut values = evaluate_mean(&design, &x)?;
    // harmonics absent from the estimation design still shape the truth
    if !config.harmonics.contains(&1.0) && config.amplitude != 0.0 {
        let (c, d) = seasonal_coefficients(config.amplitude, config.phase_days);
        for (v, t) in values.iter_mut().zip(&epochs) {
            let arg = 2.0 * std::f64::consts::PI * (t - config.start_epoch) / DAYS_PER_YEAR;
            *v += c * arg.sin() + d * arg.cos();
        }
    }

    let mut noise_rng = stream(config.seed, rep, STREAM_NOISE);
    let noise = simulate_noise(&config.noise, n, &mut noise_rng)?;
    for (v, e) in values.iter_mut().zip(&noise) {
        *v += e;
    }
    let ts = TimeSeries {
        epochs,
        values,
        sigma_hint: None,
        offsets_declared: offset_epochs.clone(),
        station_id: format!("SIM{rep}"),
        metadata: vec![format!("scenario {} replication {rep} seed {}", config.name, config.seed)],
    };
    let truth = Truth {
        labels,
        x,
        noise: config.noise.clone(),
        offset_epochs,
    };
    Ok((ts, truth))
}

/// Removes `floor(fraction * n)` uniformly chosen interior epochs.
pub fn apply_gaps(series: &TimeSeries, fraction: f64, rng: &mut impl Rng) -> Result<TimeSeries> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidInput(format!("gap fraction {fraction} must lie in [0, 1)")));
    }
    let n = series.len();
    let remove = (fraction * n as f64).floor() as usize;
    if remove == 0 {
        return Ok(series.clone());
    }
    if remove > n.saturating_sub(2) {
        return Err(Error::InvalidInput(format!("cannot remove {remove} of {n} epochs and keep both ends")));
    }
    let mut keep = vec![true; n];
    for k in sample(rng, n - 2, remove) {
        keep[k + 1] = false;
    }
    let pick = |v: &[f64]| -> Vec<f64> { v.iter().zip(&keep).filter(|(_, &k)| k).map(|(x, _)| *x).collect() };
    Ok(TimeSeries {
        epochs: pick(&series.epochs),
        values: pick(&series.values),
        sigma_hint: series.sigma_hint.as_deref().map(pick),
        offsets_declared: series.offsets_declared.clone(),
        station_id: series.station_id.clone(),
        metadata: series.metadata.clone(),
    })
}

/// Series of replication `rep` as handed to the estimators.
pub fn simulate_replication(config: &ScenarioConfig, rep: usize) -> Result<(TimeSeries, Truth)> {
    let (ts, truth) = simulate_series(config, rep)?;
    let mut rng = stream(config.seed, rep, STREAM_GAPS);
    Ok((apply_gaps(&ts, config.gap_fraction, &mut rng)?, truth))
}

/// Estimates of one method on one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub x_hat: Vec<f64>,
    pub ci: Vec<(f64, f64)>,
    pub gamma: Vec<f64>,
    /// Wall-clock of the estimate call in seconds.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepRecord {
    pub rep: usize,
    pub n_obs: usize,
    pub truth: Truth,
    pub outcomes: Vec<(SimMethod, std::result::Result<MethodOutcome, String>)>,
}

/// Runs one configured method on a series.
pub fn estimate_with(
    method: SimMethod,
    config: &ScenarioConfig,
    ts: &TimeSeries,
    truth: &Truth,
) -> Result<Option<EstimationResult>> {
    let spec = FunctionalSpec::linear(config.start_epoch)
        .with_harmonics(&config.harmonics)
        .with_offsets(&ts.offsets_declared);
    let design = build_design_matrix(&ts.epochs, &spec)?;
    let family = config.family();
    match method {
        SimMethod::Gmwmx1 => gmwmx(&ts.values, &design, &family, 1, config.alpha, &config.gmwm).map(Some),
        SimMethod::Gmwmx2 => gmwmx(&ts.values, &design, &family, 2, config.alpha, &config.gmwm).map(Some),
        SimMethod::Mle => mle_estimate(&ts.values, &design, &family, config.alpha, &config.gmwm, &config.mle).map(Some),
        SimMethod::Truth => {
            if design.column_labels != truth.labels {
                return Err(Error::Dimension("truth does not match the estimation design".into()));
            }
            Ok(None)
        }
    }
}

fn run_rep(config: &ScenarioConfig, rep: usize) -> Result<RepRecord> {
    let (ts, truth) = simulate_replication(config, rep)?;
    let mut outcomes = Vec::with_capacity(config.methods.len());
    for &m in &config.methods {
        let start = Instant::now();
        let out = estimate_with(m, config, &ts, &truth);
        let seconds = start.elapsed().as_secs_f64();
        let out = match out {
            Ok(Some(r)) => Ok(MethodOutcome {
                x_hat: r.x_hat,
                ci: r.ci,
                gamma: r.gamma_hat.params(),
                seconds,
            }),
            Ok(None) => Ok(MethodOutcome {
                x_hat: truth.x.clone(),
                ci: truth.x.iter().map(|&v| (v, v)).collect(),
                gamma: truth.noise.params(),
                seconds,
            }),
            Err(e) => Err(e.to_string()),
        };
        outcomes.push((m, out));
    }
    Ok(RepRecord {
        rep,
        n_obs: ts.len(),
        truth,
        outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    /// Population standard deviation, so `rmse² = bias² + sd²`.
    pub sd: f64,
    pub rmse: f64,
    pub median: f64,
    pub median_bias: f64,
    /// Share of intervals containing the truth, for functional parameters.
    pub coverage: Option<f64>,
    /// `(1-α) ± 1.96 √(α(1-α)/N)`.
    pub coverage_band: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: SimMethod,
    pub succeeded: usize,
    pub failed: usize,
    pub params: Vec<ParamSummary>,
}

impl MethodSummary {
    pub fn param(&self, name: &str) -> Option<&ParamSummary> {
        self.params.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub scenario: String,
    pub n: usize,
    pub n_reps: usize,
    pub seed: u64,
    pub alpha: f64,
    pub methods: Vec<MethodSummary>,
}

impl McSummary {
    pub fn method(&self, m: SimMethod) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    /// One row per method and parameter.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,param,truth,mean,bias,sd,rmse,median,coverage,band_low,band_high,succeeded,failed\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for m in &self.methods {
            for p in &m.params {
                out.push_str(&format!(
                    "{},{},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{},{},{}\n",
                    m.method,
                    p.name,
                    p.truth,
                    p.mean,
                    p.bias,
                    p.sd,
                    p.rmse,
                    p.median,
                    opt(p.coverage),
                    opt(p.coverage_band.map(|b| b.0)),
                    opt(p.coverage_band.map(|b| b.1)),
                    m.succeeded,
                    m.failed
                ));
            }
        }
        out
    }
}

/// Mean wall-clock per method, kept apart from the reproducible summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McTiming {
    pub workers: usize,
    pub total_seconds: f64,
    pub mean_seconds: Vec<(SimMethod, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McRun {
    pub summary: McSummary,
    pub timing: McTiming,
    pub records: Vec<RepRecord>,
}

/// Binomial band of an empirical coverage over `reps` replications.
pub fn coverage_band(alpha: f64, reps: usize) -> (f64, f64) {
    let half = 1.96 * (alpha * (1.0 - alpha) / reps as f64).sqrt();
    (1.0 - alpha - half, 1.0 - alpha + half)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn param_summary(name: String, truth: f64, est: &[f64], hits: Option<&[bool]>, alpha: f64) -> ParamSummary {
    let k = est.len() as f64;
    // moments of the errors, exact when every estimate equals the truth
    let bias = est.iter().map(|e| e - truth).sum::<f64>() / k;
    let mean = truth + bias;
    let sd = (est.iter().map(|e| (e - truth - bias).powi(2)).sum::<f64>() / k).sqrt();
    let mut sorted = est.to_vec();
    sorted.sort_by(f64::total_cmp);
    let med = median(&sorted);
    let coverage = hits.map(|h| h.iter().filter(|&&b| b).count() as f64 / h.len() as f64);
    ParamSummary {
        name,
        truth,
        mean,
        bias,
        sd,
        rmse: (bias * bias + sd * sd).sqrt(),
        median: med,
        median_bias: med - truth,
        coverage,
        coverage_band: hits.map(|h| coverage_band(alpha, h.len())),
    }
}

/// Reduces replication records; the result does not depend on their order.
pub fn summarize(config: &ScenarioConfig, records: &[RepRecord]) -> Result<McSummary> {
    let mut records: Vec<&RepRecord> = records.iter().collect();
    records.sort_by_key(|r| r.rep);
    let family = config.family();
    let same_family = family == config.noise.family();
    let mut methods = Vec::new();
    for &m in &config.methods {
        let ok: Vec<(&RepRecord, &MethodOutcome)> = records
            .iter()
            .filter_map(|r| {
                r.outcomes
                    .iter()
                    .find(|(mm, _)| *mm == m)
                    .and_then(|(_, o)| o.as_ref().ok())
                    .map(|o| (*r, o))
            })
            .collect();
        let failed = records.len() - ok.len();
        if failed as f64 > MAX_FAILURE_FRACTION * records.len() as f64 {
            return Err(Error::TooManyFailures {
                failed,
                total: records.len(),
            });
        }
        let mut params = Vec::new();
        if let Some((first, _)) = ok.first() {
            for (i, label) in first.truth.labels.iter().enumerate() {
                // offset amplitudes vary by replication: summarize the errors
                let is_offset = label.starts_with('g');
                let truth = if is_offset { 0.0 } else { first.truth.x[i] };
                let est: Vec<f64> = ok
                    .iter()
                    .map(|(r, o)| if is_offset { o.x_hat[i] - r.truth.x[i] } else { o.x_hat[i] })
                    .collect();
                let hits: Vec<bool> = ok
                    .iter()
                    .map(|(r, o)| o.ci[i].0 <= r.truth.x[i] && r.truth.x[i] <= o.ci[i].1)
                    .collect();
                params.push(param_summary(label.clone(), truth, &est, Some(&hits), config.alpha));
            }
            if same_family {
                let truth = config.noise.params();
                for (j, name) in family.param_names().into_iter().enumerate() {
                    let est: Vec<f64> = ok.iter().map(|(_, o)| o.gamma[j]).collect();
                    params.push(param_summary(name, truth[j], &est, None, config.alpha));
                }
            }
        }
        methods.push(MethodSummary {
            method: m,
            succeeded: ok.len(),
            failed,
            params,
        });
    }
    Ok(McSummary {
        scenario: config.name.clone(),
        n: config.len(),
        n_reps: records.len(),
        seed: config.seed,
        alpha: config.alpha,
        methods,
    })
}

/// Runs every replication on `workers` threads and reduces the results.
pub fn run_monte_carlo(config: &ScenarioConfig, workers: usize) -> Result<McRun> {
    config.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    let records: Vec<RepRecord> = pool.install(|| {
        (0..config.n_reps)
            .into_par_iter()
            .map(|rep| run_rep(config, rep))
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = summarize(config, &records)?;
    let mean_seconds = config
        .methods
        .iter()
        .map(|&m| {
            let times: Vec<f64> = records
                .iter()
                .flat_map(|r| r.outcomes.iter())
                .filter(|(mm, o)| *mm == m && o.is_ok())
                .map(|(_, o)| o.as_ref().map_or(0.0, |o| o.seconds))
                .collect();
            (m, times.iter().sum::<f64>() / times.len().max(1) as f64)
        })
        .collect();
    Ok(McRun {
        summary,
        timing: McTiming {
            workers: workers.max(1),
            total_seconds: start.elapsed().as_secs_f64(),
            mean_seconds,
        },
        records,
    })
}
