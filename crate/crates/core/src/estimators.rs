//! Regression and wavelet-moment estimators.
//!
//! GMWMX-1 fits the trajectory by OLS, then matches the Haar wavelet
//! variance of the OLS residuals to the model. GMWMX-2 refits the trajectory
//! by GLS under the first-pass noise model and matches the wavelet variance
//! again. Standard errors follow the sandwich form for one pass and the GLS
//! form for two.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::functional::{numerical_rank, DesignMatrix};
use crate::linalg::{hstack, CovarianceFactor, ToeplitzMatvec};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::stochastic::{closed_form_wv, grid_indices, Component, ComponentKind, ModelFamily, StochasticModel};
use crate::wavelet::{estimate_wv, OmegaKind, WvEstimate};

/// Margin keeping the memory parameter inside `(0, 1/2)`.
pub const D_MARGIN: f64 = 1e-4;
pub const LAMBDA_RANGE: (f64, f64) = (1e-5, 1e2);
pub const NU_RANGE: (f64, f64) = (0.05, 20.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gmwmx1,
    Gmwmx2,
    Mle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Gmwmx1 => "gmwmx1",
            Method::Gmwmx2 => "gmwmx2",
            Method::Mle => "mle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gmwmx1" | "gmwmx-1" => Ok(Method::Gmwmx1),
            "gmwmx2" | "gmwmx-2" => Ok(Method::Gmwmx2),
            "mle" => Ok(Method::Mle),
            other => Err(Error::InvalidInput(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmwmOptions {
    /// Number of wavelet scales; `None` uses `floor(log2 n) - 2`.
    pub levels: Option<usize>,
    pub omega: OmegaKind,
    /// Optimizer starts: one moment-based, the rest from a shape grid.
    pub starts: usize,
    pub max_evals: usize,
    pub rel_tol: f64,
}

impl Default for GmwmOptions {
    fn default() -> Self {
        Self {
            levels: None,
            omega: OmegaKind::Diagonal,
            starts: 5,
            max_evals: 2000,
            rel_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Upper-triangular factor of `A = QR`.
    pub r: DMatrix<f64>,
    pub q: DMatrix<f64>,
}

impl OlsFit {
    /// `(A^T A)^{-1} = R^{-1} R^{-T}`.
    pub fn gram_inverse(&self) -> DMatrix<f64> {
        let r_inv = upper_inverse(&self.r);
        &r_inv * r_inv.transpose()
    }
}

fn upper_inverse(r: &DMatrix<f64>) -> DMatrix<f64> {
    let p = r.nrows();
    r.solve_upper_triangular(&DMatrix::identity(p, p))
        .unwrap_or_else(|| DMatrix::from_element(p, p, f64::NAN))
}

fn check_dims(y: &[f64], a: &DMatrix<f64>) -> Result<()> {
    if y.len() != a.nrows() {
        return Err(Error::Dimension(format!(
            "{} observations for a design with {} rows",
            y.len(),
            a.nrows()
        )));
    }
    Ok(())
}

/// Least squares through a Householder QR of `A`.
pub fn ols(y: &[f64], a: &DMatrix<f64>) -> Result<OlsFit> {
    check_dims(y, a)?;
    let p = a.ncols();
    let rank = numerical_rank(a);
    if rank < p || a.nrows() < p {
        return Err(Error::RankDeficient { rank, columns: p });
    }
    let qr = a.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let yv = DVector::from_column_slice(y);
    let qty = q.transpose() * &yv;
    let x = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient { rank, columns: p })?;
    let residuals = (yv - a * &x).iter().copied().collect();
    Ok(OlsFit {
        x: x.iter().copied().collect(),
        residuals,
        r,
        q,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlsFit {
    pub x: Vec<f64>,
    /// `(A^T Σ^{-1} A)^{-1}`.
    pub cov: DMatrix<f64>,
    /// `Y - A x` on the original scale.
    pub residuals: Vec<f64>,
    /// Squared norm of the whitened residuals.
    pub whitened_rss: f64,
    pub logdet: f64,
}

/// GLS by Cholesky whitening followed by OLS on the whitened system.
pub fn gls(y: &[f64], a: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Result<GlsFit> {
    check_dims(y, a)?;
    if sigma.nrows() != a.nrows() || sigma.ncols() != a.nrows() {
        return Err(Error::Dimension(format!(
            "covariance is {}x{} for {} observations",
            sigma.nrows(),
            sigma.ncols(),
            a.nrows()
        )));
    }
    gls_factored(y, a, &CovarianceFactor::from_dense(sigma)?)
}

pub fn gls_factored(y: &[f64], a: &DMatrix<f64>, factor: &CovarianceFactor) -> Result<GlsFit> {
    check_dims(y, a)?;
    let p = a.ncols();
    let (w, logdet) = factor.whiten(&hstack(a, y))?;
    let wa = w.columns(0, p).into_owned();
    let wy: Vec<f64> = w.column(p).iter().copied().collect();
    let fit = ols(&wy, &wa)?;
    let whitened_rss = fit.residuals.iter().map(|e| e * e).sum();
    let xv = DVector::from_column_slice(&fit.x);
    let residuals = (DVector::from_column_slice(y) - a * xv).iter().copied().collect();
    Ok(GlsFit {
        cov: fit.gram_inverse(),
        x: fit.x,
        residuals,
        whitened_rss,
        logdet,
    })
}

/// Standard-normal quantile `z_{1-α/2}`.
pub fn z_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} must lie in (0, 0.5)")));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(1.0 - alpha / 2.0))
}

/// `x ± z_{1-α/2} σ`.
pub fn confidence_interval(x: f64, sigma: f64, alpha: f64) -> Result<(f64, f64)> {
    let z = z_quantile(alpha)?;
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("standard error {sigma} must be finite and non-negative")));
    }
    Ok((x - z * sigma, x + z * sigma))
}

/// Unconstrained optimizer coordinates for a noise model.
pub(crate) mod transform {
    use super::*;

    fn logit(p: f64) -> f64 {
        (p / (1.0 - p)).ln()
    }

    fn logistic(u: f64) -> f64 {
        1.0 / (1.0 + (-u).exp())
    }

    pub fn d_from(u: f64) -> f64 {
        D_MARGIN + (0.5 - 2.0 * D_MARGIN) * logistic(u)
    }

    pub fn d_to(d: f64) -> f64 {
        let p = ((d - D_MARGIN) / (0.5 - 2.0 * D_MARGIN)).clamp(1e-9, 1.0 - 1e-9);
        logit(p)
    }

    /// Shape coordinates of one component (everything but the variance).
    pub fn shape_to(c: &Component) -> Vec<f64> {
        match *c {
            Component::White { .. } => vec![],
            Component::PowerLaw { d, .. } => vec![d_to(d)],
            Component::Matern { lambda, nu, .. } => vec![lambda.ln(), nu.ln()],
        }
    }

    /// Component from its variance and shape coordinates; `None` outside
    /// the feasible box.
    pub fn shape_from(kind: ComponentKind, sigma2: f64, u: &[f64]) -> Option<Component> {
        match kind {
            ComponentKind::White => Some(Component::White { sigma2 }),
            ComponentKind::PowerLaw => Some(Component::PowerLaw { sigma2, d: d_from(u[0]) }),
            ComponentKind::Matern => {
                let (lambda, nu) = (u[0].exp(), u[1].exp());
                let ok = (LAMBDA_RANGE.0..=LAMBDA_RANGE.1).contains(&lambda)
                    && (NU_RANGE.0..=NU_RANGE.1).contains(&nu);
                ok.then_some(Component::Matern { sigma2, lambda, nu })
            }
        }
    }

    pub fn n_shape(kind: ComponentKind) -> usize {
        kind.n_params() - 1
    }

    /// `[log σ², shape...]` per component.
    pub fn to_unconstrained(model: &StochasticModel, floor: f64) -> Vec<f64> {
        model
            .components
            .iter()
            .flat_map(|c| {
                let mut v = vec![c.sigma2().max(floor).ln()];
                v.extend(shape_to(c));
                v
            })
            .collect()
    }

    pub fn from_unconstrained(family: &ModelFamily, u: &[f64]) -> Option<StochasticModel> {
        let mut at = 0;
        let mut comps = Vec::with_capacity(family.kinds().len());
        for &k in family.kinds() {
            let s2 = u[at].exp();
            let c = shape_from(k, s2, &u[at + 1..at + 1 + n_shape(k)])?;
            at += 1 + n_shape(k);
            comps.push(c);
        }
        Some(StochasticModel::new(comps))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmwmFit {
    pub model: StochasticModel,
    pub objective: f64,
    /// `ν(γ̂)` at the fitted scales.
    pub nu_model: Vec<f64>,
    pub evaluations: usize,
    pub converged: bool,
}

/// Weighted misfit `(ν̂ - ν)^T Ω (ν̂ - ν)`.
fn weighted_misfit(nu_hat: &[f64], nu: &[f64], omega: &DMatrix<f64>) -> f64 {
    let r: Vec<f64> = nu_hat.iter().zip(nu).map(|(a, b)| a - b).collect();
    let j = r.len();
    let mut total = 0.0;
    for a in 0..j {
        total += omega[(a, a)] * r[a] * r[a];
        for b in a + 1..j {
            total += 2.0 * omega[(a, b)] * r[a] * r[b];
        }
    }
    total
}

/// Theoretical wavelet variances of `model` at `levels` scales.
fn model_wv(model: &StochasticModel, levels: usize) -> Result<Vec<f64>> {
    let acvf = model.autocovariances(1 << levels)?;
    Ok(closed_form_wv(&acvf, levels))
}

/// Shape grid of one component kind, in natural parameters.
fn shape_grid(kind: ComponentKind) -> Vec<Vec<f64>> {
    match kind {
        ComponentKind::White => vec![vec![]],
        ComponentKind::PowerLaw => (1..=24).map(|i| vec![0.02 * i as f64]).collect(),
        ComponentKind::Matern => {
            let lambdas = [1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0];
            let nus = [0.25, 0.5, 1.0, 1.5, 2.5, 4.0];
            lambdas
                .iter()
                .flat_map(|&l| nus.iter().map(move |&n| vec![l, n]))
                .collect()
        }
    }
}

/// Non-negative weighted least squares for the component variances given
/// unit-variance wavelet variances `u[c]`, by enumerating active sets.
fn nonnegative_variances(nu_hat: &[f64], units: &[Vec<f64>], omega: &DMatrix<f64>) -> Vec<f64> {
    let q = units.len();
    let j = nu_hat.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << q) {
        let active: Vec<usize> = (0..q).filter(|c| mask & (1 << c) != 0).collect();
        let k = active.len();
        let u = DMatrix::from_fn(j, k, |r, c| units[active[c]][r]);
        let ut_omega = u.transpose() * omega;
        let normal = &ut_omega * &u;
        let rhs = &ut_omega * DVector::from_column_slice(nu_hat);
        let Some(sol) = normal.lu().solve(&rhs) else { continue };
        if sol.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            continue;
        }
        let mut full = vec![0.0; q];
        for (c, &a) in active.iter().enumerate() {
            full[a] = sol[c];
        }
        let fitted: Vec<f64> = (0..j).map(|r| (0..q).map(|c| full[c] * units[c][r]).sum()).collect();
        let f = weighted_misfit(nu_hat, &fitted, omega);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, full));
        }
    }
    best.map(|(_, v)| v).unwrap_or_else(|| vec![0.0; q])
}

/// Moment-based start: white variance from the finest scale, the excess of
/// `τ_j ν̂_j` over it for the other components, and the memory parameter
/// from the log-log slope over the three coarsest scales.
fn moment_start(wv: &WvEstimate, family: &ModelFamily) -> StochasticModel {
    let levels = wv.levels();
    let tnu: Vec<f64> = (0..levels).map(|j| wv.nu_hat[j] * wv.scales[j] as f64).collect();
    let base = tnu[0].max(f64::MIN_POSITIVE);
    let has_white = family.kinds().contains(&ComponentKind::White);
    let others = family.kinds().iter().filter(|k| **k != ComponentKind::White).count().max(1);
    let excess = tnu.iter().map(|v| (v - base).max(0.0)).sum::<f64>() / levels as f64;
    let coloured = if has_white {
        excess.max(0.1 * base) / others as f64
    } else {
        base / others as f64
    };
    let tail = levels.saturating_sub(3);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (tail..levels)
        .map(|j| ((wv.scales[j] as f64).ln(), wv.nu_hat[j].max(f64::MIN_POSITIVE).ln()))
        .unzip();
    let slope = if xs.len() >= 2 {
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    } else {
        -1.0
    };
    let d = ((slope + 1.0) / 2.0).clamp(0.01, 0.49);
    StochasticModel::new(
        family
            .kinds()
            .iter()
            .map(|k| match k {
                ComponentKind::White => Component::White { sigma2: base },
                ComponentKind::PowerLaw => Component::PowerLaw { sigma2: coloured, d },
                ComponentKind::Matern => Component::Matern {
                    sigma2: coloured,
                    lambda: 0.1,
                    nu: 1.0,
                },
            })
            .collect(),
    )
}

/// Best shape-grid points with variances profiled out, most promising first.
fn grid_starts(wv: &WvEstimate, family: &ModelFamily, count: usize) -> Result<Vec<StochasticModel>> {
    const MAX_COMBOS: usize = 4096;
    if count == 0 {
        return Ok(Vec::new());
    }
    let levels = wv.levels();
    let grids: Vec<Vec<Vec<f64>>> = family.kinds().iter().map(|&k| shape_grid(k)).collect();
    let total: usize = grids.iter().map(Vec::len).product();
    let combos: Vec<Vec<usize>> = if total <= MAX_COMBOS {
        let mut out = vec![vec![]];
        for g in &grids {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..g.len()).map(move |i| {
                        let mut p = prefix.clone();
                        p.push(i);
                        p
                    })
                })
                .collect();
        }
        out
    } else {
        let longest = grids.iter().map(Vec::len).max().unwrap_or(1);
        (0..longest)
            .map(|i| grids.iter().map(|g| i * g.len() / longest).collect())
            .collect()
    };
    // unit-variance wavelet variances are shared across combos
    let mut unit_cache: Vec<Vec<Option<Vec<f64>>>> = grids.iter().map(|g| vec![None; g.len()]).collect();
    let mut scored: Vec<(f64, StochasticModel)> = Vec::with_capacity(combos.len());
    for combo in combos {
        let mut comps = Vec::with_capacity(combo.len());
        let mut units = Vec::with_capacity(combo.len());
        for (c, &i) in combo.iter().enumerate() {
            let kind = family.kinds()[c];
            let mut p = vec![1.0];
            p.extend_from_slice(&grids[c][i]);
            let comp = Component::from_params(kind, &p);
            if unit_cache[c][i].is_none() {
                unit_cache[c][i] = Some(model_wv(&StochasticModel::new(vec![comp]), levels)?);
            }
            units.push(unit_cache[c][i].clone().unwrap_or_default());
            comps.push(comp);
        }
        let vars = nonnegative_variances(&wv.nu_hat, &units, &wv.omega);
        let fitted: Vec<f64> = (0..levels)
            .map(|r| vars.iter().zip(&units).map(|(v, u)| v * u[r]).sum())
            .collect();
        let f = weighted_misfit(&wv.nu_hat, &fitted, &wv.omega);
        let model = StochasticModel::new(comps.iter().zip(&vars).map(|(c, &v)| c.with_sigma2(v)).collect());
        scored.push((f, model));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(scored.into_iter().take(count).map(|(_, m)| m).collect())
}

/// Minimizes `(ν̂ - ν(γ))^T Ω (ν̂ - ν(γ))` over the feasible box.
pub fn gmwm_fit(wv: &WvEstimate, family: &ModelFamily, opts: &GmwmOptions) -> Result<GmwmFit> {
    let levels = wv.levels();
    let q = family.n_params();
    if q > levels {
        return Err(Error::UnderIdentified { params: q, levels });
    }
    if family.kinds().is_empty() {
        return Err(Error::InvalidInput("empty noise model family".into()));
    }
    if wv.omega.nrows() != levels || wv.omega.ncols() != levels {
        return Err(Error::Dimension("weighting matrix does not match the number of scales".into()));
    }
    let objective = |u: &[f64]| -> f64 {
        match transform::from_unconstrained(family, u) {
            Some(m) => match model_wv(&m, levels) {
                Ok(nu) => weighted_misfit(&wv.nu_hat, &nu, &wv.omega),
                Err(_) => f64::INFINITY,
            },
            None => f64::INFINITY,
        }
    };
    let floor = 1e-6 * (wv.nu_hat[0] * wv.scales[0] as f64).max(f64::MIN_POSITIVE);
    let mut starts = vec![moment_start(wv, family)];
    starts.extend(grid_starts(wv, family, opts.starts.saturating_sub(1))?);
    starts.truncate(opts.starts.max(1));

    let nm = NelderMeadOptions {
        max_evals: opts.max_evals,
        f_rel_tol: opts.rel_tol,
        ..NelderMeadOptions::default()
    };
    let mut best: Option<crate::optim::Minimum> = None;
    let mut evaluations = 0;
    for s in &starts {
        let u0 = transform::to_unconstrained(s, floor);
        let m = nelder_mead(objective, &u0, &nm);
        evaluations += m.evaluations;
        if best.as_ref().is_none_or(|b| m.f < b.f) {
            best = Some(m);
        }
    }
    let best = best.ok_or_else(|| Error::InvalidInput("no optimizer start".into()))?;
    let model = transform::from_unconstrained(family, &best.x)
        .ok_or_else(|| Error::Domain("optimizer left the feasible region".into()))?;
    let nu_model = model_wv(&model, levels)?;
    Ok(GmwmFit {
        model,
        objective: best.f,
        nu_model,
        evaluations,
        converged: best.converged,
    })
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    /// `(stage, seconds)` in execution order.
    pub stages: Vec<(String, f64)>,
}

struct Stopwatch {
    start: Instant,
    last: Instant,
    timing: Timing,
}

impl Stopwatch {
    fn new() -> Self {
        let now = Instant::now();
        Self {
            start: now,
            last: now,
            timing: Timing::default(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timing.stages.push((stage.to_string(), (now - self.last).as_secs_f64()));
        self.last = now;
    }

    fn finish(mut self) -> Timing {
        self.timing.total_seconds = self.start.elapsed().as_secs_f64();
        self.timing
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub method: Method,
    /// Regression/moment-matching passes (1 or 2; 1 for the likelihood).
    pub iterations: usize,
    pub labels: Vec<String>,
    pub units: Vec<String>,
    pub x_hat: Vec<f64>,
    pub x_cov: DMatrix<f64>,
    pub std_errors: Vec<f64>,
    pub ci: Vec<(f64, f64)>,
    pub alpha: f64,
    pub gamma_hat: StochasticModel,
    /// GMWM objective at each pass; the negative log-likelihood for the MLE.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub evaluations: usize,
    /// Wavelet variance of the final residuals.
    pub wv: WvEstimate,
    pub nu_model: Vec<f64>,
    pub loglik: Option<f64>,
    /// Set when a variance estimate sits on the zero boundary.
    pub boundary: bool,
    pub warnings: Vec<String>,
    pub timing: Timing,
}

impl EstimationResult {
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

pub(crate) fn intervals(x: &[f64], cov: &DMatrix<f64>, alpha: f64) -> Result<(Vec<f64>, Vec<(f64, f64)>)> {
    let se: Vec<f64> = (0..x.len()).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    let ci = x
        .iter()
        .zip(&se)
        .map(|(&xi, &s)| confidence_interval(xi, s, alpha))
        .collect::<Result<Vec<_>>>()?;
    Ok((se, ci))
}

/// `(A^T A)^{-1} A^T Σ A (A^T A)^{-1}` with `ΣQ` by FFT on the full grid.
pub fn sandwich_covariance(fit: &OlsFit, model: &StochasticModel, idx: &[usize]) -> Result<DMatrix<f64>> {
    let len = idx.last().map_or(0, |&l| l + 1);
    let acvf = model.autocovariances(len.saturating_sub(1))?;
    let op = ToeplitzMatvec::new(&acvf);
    let p = fit.q.ncols();
    let mut sq = DMatrix::<f64>::zeros(idx.len(), p);
    for c in 0..p {
        let col: Vec<f64> = fit.q.column(c).iter().copied().collect();
        let prod = op.apply_subset(idx, &col);
        sq.set_column(c, &DVector::from_vec(prod));
    }
    let middle = fit.q.transpose() * sq;
    let r_inv = upper_inverse(&fit.r);
    let cov = &r_inv * middle * r_inv.transpose();
    Ok((&cov + cov.transpose()) * 0.5)
}

fn wv_warnings(wv: &WvEstimate, out: &mut Vec<String>) {
    if wv.gap_warning {
        out.push(format!(
            "{:.1}% of the residual grid was interpolated before wavelet filtering",
            100.0 * wv.gap_fraction
        ));
    }
}

/// One- or two-pass GMWMX on observations `y` at the design epochs.
pub fn gmwmx(
    y: &[f64],
    design: &DesignMatrix,
    family: &ModelFamily,
    iterations: usize,
    alpha: f64,
    opts: &GmwmOptions,
) -> Result<EstimationResult> {
    if !(1..=2).contains(&iterations) {
        return Err(Error::UnsupportedIterations(iterations));
    }
    z_quantile(alpha)?;
    let a = &design.entries;
    let idx = grid_indices(&design.epochs)?;
    let mut clock = Stopwatch::new();
    let mut warnings = Vec::new();

    let ols_fit = ols(y, a)?;
    clock.lap("ols");
    let wv1 = estimate_wv(&design.epochs, &ols_fit.residuals, opts.levels, opts.omega)?;
    wv_warnings(&wv1, &mut warnings);
    clock.lap("wavelet_variance");
    let fit1 = gmwm_fit(&wv1, family, opts)?;
    clock.lap("gmwm");
    let mut trace = vec![fit1.objective];
    let mut converged = fit1.converged;
    let mut evaluations = fit1.evaluations;

    let (x_hat, x_cov, fit, wv) = if iterations == 1 {
        let cov = sandwich_covariance(&ols_fit, &fit1.model, &idx)?;
        clock.lap("covariance");
        (ols_fit.x, cov, fit1, wv1)
    } else {
        let len = idx.last().map_or(0, |&l| l + 1);
        let acvf1 = fit1.model.autocovariances(len.saturating_sub(1))?;
        let factor1 = CovarianceFactor::new(&acvf1, &idx)?;
        let gls_fit = gls_factored(y, a, &factor1)?;
        clock.lap("gls");
        let wv2 = estimate_wv(&design.epochs, &gls_fit.residuals, opts.levels, opts.omega)?;
        wv_warnings(&wv2, &mut warnings);
        clock.lap("wavelet_variance");
        let fit2 = gmwm_fit(&wv2, family, opts)?;
        clock.lap("gmwm");
        trace.push(fit2.objective);
        converged &= fit2.converged;
        evaluations += fit2.evaluations;
        let acvf2 = fit2.model.autocovariances(len.saturating_sub(1))?;
        let factor2 = CovarianceFactor::new(&acvf2, &idx)?;
        let (w, _) = factor2.whiten(a)?;
        let wfit = ols(&vec![0.0; w.nrows()], &w)?;
        let cov = wfit.gram_inverse();
        clock.lap("covariance");
        (gls_fit.x, cov, fit2, wv2)
    };
    if !converged {
        warnings.push("optimizer stopped at its evaluation budget; best iterate reported".into());
    }
    let (std_errors, ci) = intervals(&x_hat, &x_cov, alpha)?;
    let boundary = fit.model.components.iter().any(|c| c.sigma2() < 1e-10 * fit.nu_model[0].max(1e-300));
    let method = if iterations == 1 { Method::Gmwmx1 } else { Method::Gmwmx2 };
    Ok(EstimationResult {
        method,
        iterations,
        labels: design.column_labels.clone(),
        units: design.column_units.clone(),
        x_hat,
        x_cov,
        std_errors,
        ci,
        alpha,
        gamma_hat: fit.model,
        objective_trace: trace,
        converged,
        evaluations,
        wv,
        nu_model: fit.nu_model,
        loglik: None,
        boundary,
        warnings,
        timing: clock.finish(),
    })
}
