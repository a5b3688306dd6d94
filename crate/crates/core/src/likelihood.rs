//! Gaussian likelihood of the regression model with correlated noise and
//! its maximizer, used as a reference for the moment estimators.
//!
//! The maximizer concentrates out the trajectory by GLS and the overall
//! noise scale in closed form, leaving the component fractions and shape
//! parameters to the simplex search. Profiles can be evaluated with dense
//! Cholesky algebra or, on a contiguous grid, with the Levinson recursion;
//! both give the same numbers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::estimators::{gls_factored, gmwmx, intervals, ols, transform, EstimationResult, GmwmOptions, Method, Timing};
use crate::functional::DesignMatrix;
use crate::linalg::{failing_minor, CovarianceFactor};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::stochastic::{grid_indices, ModelFamily, StochasticModel};
use crate::wavelet::estimate_wv;

pub const DEFAULT_LIKELIHOOD_CAP: usize = 8192;

#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodEvaluation {
    pub loglik: f64,
    pub x: Vec<f64>,
    pub gamma: StochasticModel,
    pub n: usize,
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::LikelihoodCap { n, cap })
    } else {
        Ok(())
    }
}

/// `-½ rᵀΣ⁻¹r - ½ log det(2πΣ)` with `r = Y - Ax`, by dense Cholesky.
pub fn gaussian_loglik(y: &[f64], design: &DesignMatrix, x: &[f64], model: &StochasticModel) -> Result<LikelihoodEvaluation> {
    gaussian_loglik_capped(y, design, x, model, DEFAULT_LIKELIHOOD_CAP)
}

pub fn gaussian_loglik_capped(
    y: &[f64],
    design: &DesignMatrix,
    x: &[f64],
    model: &StochasticModel,
    cap: usize,
) -> Result<LikelihoodEvaluation> {
    let n = y.len();
    check_cap(n, cap)?;
    let mean = crate::functional::evaluate_mean(design, x)?;
    if mean.len() != n {
        return Err(Error::Dimension(format!("{n} observations for {} design rows", mean.len())));
    }
    let sigma = model.covariance_matrix(&design.epochs)?;
    let chol = match sigma.cholesky() {
        Some(c) => c,
        None => {
            let sigma = model.covariance_matrix(&design.epochs)?;
            return Err(Error::NotPositiveDefinite {
                minor: failing_minor(&sigma).unwrap_or(n),
            });
        }
    };
    let r = DVector::from_iterator(n, y.iter().zip(&mean).map(|(a, b)| a - b));
    let l = chol.l_dirty();
    let w = l
        .solve_lower_triangular(&r)
        .ok_or(Error::NotPositiveDefinite { minor: n })?;
    let logdet = 2.0 * (0..n).map(|i| l[(i, i)].ln()).sum::<f64>();
    let loglik = -0.5 * w.norm_squared() - 0.5 * (n as f64 * (2.0 * PI).ln() + logdet);
    Ok(LikelihoodEvaluation {
        loglik,
        x: x.to_vec(),
        gamma: model.clone(),
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LikelihoodEngine {
    /// Levinson on contiguous grids, dense otherwise.
    #[default]
    Auto,
    Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MleOptions {
    pub cap: usize,
    pub engine: LikelihoodEngine,
    pub max_evals: usize,
    pub rel_tol: f64,
    /// Simplex size at convergence, in optimizer coordinates.
    pub x_tol: f64,
    /// Starting noise model; a GMWMX-1 fit when absent.
    #[serde(skip)]
    pub start: Option<StochasticModel>,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_LIKELIHOOD_CAP,
            engine: LikelihoodEngine::Auto,
            max_evals: 2000,
            rel_tol: 1e-10,
            x_tol: 1e-4,
            start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleFit {
    pub x: Vec<f64>,
    /// `(AᵀΣ(γ̂)⁻¹A)⁻¹`.
    pub x_cov: DMatrix<f64>,
    pub gamma: StochasticModel,
    /// `+inf` on the zero-variance boundary.
    pub loglik: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub boundary: bool,
}

/// Concentrated log-likelihood machinery for one data set.
pub struct Profile<'a> {
    y: &'a [f64],
    a: &'a DMatrix<f64>,
    family: &'a ModelFamily,
    idx: Vec<usize>,
    engine: LikelihoodEngine,
}

pub struct ProfilePoint {
    pub loglik: f64,
    pub x: Vec<f64>,
    /// Covariance of `x` under the unit-scale correlation structure.
    pub unit_cov: DMatrix<f64>,
    /// Closed-form scale `RSS / n`.
    pub scale: f64,
}

impl<'a> Profile<'a> {
    pub fn new(y: &'a [f64], design: &'a DesignMatrix, family: &'a ModelFamily, engine: LikelihoodEngine) -> Result<Self> {
        if y.len() != design.nrows() {
            return Err(Error::Dimension(format!(
                "{} observations for a design with {} rows",
                y.len(),
                design.nrows()
            )));
        }
        Ok(Self {
            y,
            a: &design.entries,
            family,
            idx: grid_indices(&design.epochs)?,
            engine,
        })
    }

    /// Number of free coordinates: `q - 1` fraction logits plus the shapes.
    pub fn dim(&self) -> usize {
        self.family.kinds().len() - 1
            + self.family.kinds().iter().map(|&k| transform::n_shape(k)).sum::<usize>()
    }

    /// Unit-total-variance model for free coordinates `u`: component
    /// variances are a softmax of `(0, u[..q-1])`.
    pub fn unit_model(&self, u: &[f64]) -> Option<StochasticModel> {
        let kinds = self.family.kinds();
        let q = kinds.len();
        let logits: Vec<f64> = std::iter::once(0.0).chain(u[..q - 1].iter().copied()).collect();
        let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = weights.iter().sum();
        let mut at = q - 1;
        let mut comps = Vec::with_capacity(q);
        for (c, &k) in kinds.iter().enumerate() {
            let ns = transform::n_shape(k);
            comps.push(transform::shape_from(k, weights[c] / total, &u[at..at + ns])?);
            at += ns;
        }
        Some(StochasticModel::new(comps))
    }

    /// Free coordinates of `model` (its overall scale is discarded).
    pub fn coordinates(&self, model: &StochasticModel) -> Vec<f64> {
        let total: f64 = model.components.iter().map(|c| c.sigma2()).sum::<f64>().max(f64::MIN_POSITIVE);
        let floor = 1e-8;
        let w: Vec<f64> = model.components.iter().map(|c| (c.sigma2() / total).max(floor)).collect();
        let mut u: Vec<f64> = w[1..].iter().map(|wc| (wc / w[0]).ln()).collect();
        for c in &model.components {
            u.extend(transform::shape_to(c));
        }
        u
    }

    fn factor(&self, model: &StochasticModel) -> Result<CovarianceFactor> {
        let len = self.idx.last().map_or(0, |&l| l + 1);
        let acvf = model.autocovariances(len.saturating_sub(1))?;
        match self.engine {
            LikelihoodEngine::Auto => CovarianceFactor::new(&acvf, &self.idx),
            LikelihoodEngine::Dense => {
                let n = self.idx.len();
                let idx = &self.idx;
                CovarianceFactor::from_dense(&DMatrix::from_fn(n, n, |i, j| acvf[idx[i].abs_diff(idx[j])]))
            }
        }
    }

    /// Log-likelihood maximized over `x` and the overall scale at the
    /// correlation structure of `unit`.
    pub fn evaluate_model(&self, unit: &StochasticModel) -> Result<ProfilePoint> {
        let n = self.y.len() as f64;
        let factor = self.factor(unit)?;
        let fit = gls_factored(self.y, self.a, &factor)?;
        let scale = fit.whitened_rss / n;
        let loglik = -0.5 * n * ((2.0 * PI * scale).ln() + 1.0) - 0.5 * fit.logdet;
        Ok(ProfilePoint {
            loglik,
            x: fit.x,
            unit_cov: fit.cov,
            scale,
        })
    }

    pub fn evaluate(&self, u: &[f64]) -> Result<ProfilePoint> {
        let unit = self
            .unit_model(u)
            .ok_or_else(|| Error::Domain("coordinates outside the feasible box".into()))?;
        self.evaluate_model(&unit)
    }
}

/// Maximum-likelihood fit with the trajectory and the noise scale profiled
/// out.
pub fn mle_fit(y: &[f64], design: &DesignMatrix, family: &ModelFamily, opts: &MleOptions) -> Result<MleFit> {
    let n = y.len();
    check_cap(n, opts.cap)?;
    let profile = Profile::new(y, design, family, opts.engine)?;

    let ols_fit = ols(y, &design.entries)?;
    let rss: f64 = ols_fit.residuals.iter().map(|e| e * e).sum();
    let ss: f64 = y.iter().map(|v| v * v).sum();
    if rss <= 1e-24 * ss.max(f64::MIN_POSITIVE) {
        // noiseless data: the likelihood is unbounded at zero variance
        let start = opts.start.clone().unwrap_or_else(|| {
            StochasticModel::new(
                family
                    .kinds()
                    .iter()
                    .map(|&k| {
                        let mut p = vec![0.0];
                        p.extend(match k {
                            crate::stochastic::ComponentKind::White => vec![],
                            crate::stochastic::ComponentKind::PowerLaw => vec![0.25],
                            crate::stochastic::ComponentKind::Matern => vec![0.1, 1.0],
                        });
                        crate::stochastic::Component::from_params(k, &p)
                    })
                    .collect(),
            )
        });
        let p = ols_fit.x.len();
        return Ok(MleFit {
            x: ols_fit.x,
            x_cov: DMatrix::zeros(p, p),
            gamma: start.scaled(0.0),
            loglik: f64::INFINITY,
            evaluations: 0,
            converged: true,
            boundary: true,
        });
    }

    let start = match &opts.start {
        Some(s) => s.clone(),
        None => gmwmx(y, design, family, 1, 0.05, &GmwmOptions::default())?.gamma_hat,
    };
    let u0 = profile.coordinates(&start);
    let nm = NelderMeadOptions {
        max_evals: opts.max_evals,
        f_rel_tol: opts.rel_tol,
        f_abs_tol: 0.0,
        x_tol: opts.x_tol,
        ..NelderMeadOptions::default()
    };
    let best = nelder_mead(
        |u| match profile.evaluate(u) {
            Ok(p) => -p.loglik,
            Err(_) => f64::INFINITY,
        },
        &u0,
        &nm,
    );
    let point = profile.evaluate(&best.x)?;
    let unit = profile
        .unit_model(&best.x)
        .ok_or_else(|| Error::Domain("optimizer left the feasible region".into()))?;
    let gamma = unit.scaled(point.scale);
    let boundary = gamma.components.iter().any(|c| c.sigma2() < 1e-6 * point.scale);
    Ok(MleFit {
        x: point.x,
        x_cov: &point.unit_cov * point.scale,
        gamma,
        loglik: point.loglik,
        evaluations: best.evaluations,
        converged: best.converged,
        boundary,
    })
}

/// [`mle_fit`] packaged like the moment estimators.
pub fn mle_estimate(
    y: &[f64],
    design: &DesignMatrix,
    family: &ModelFamily,
    alpha: f64,
    gmwm: &GmwmOptions,
    opts: &MleOptions,
) -> Result<EstimationResult> {
    check_cap(y.len(), opts.cap)?;
    let start = Instant::now();
    let mut warnings = Vec::new();
    let mut opts = opts.clone();
    let mut evaluations = 0;
    if opts.start.is_none() {
        let first = gmwmx(y, design, family, 1, alpha, gmwm)?;
        evaluations += first.evaluations;
        opts.start = Some(first.gamma_hat);
    }
    let t_start = start.elapsed().as_secs_f64();
    let fit = mle_fit(y, design, family, &opts)?;
    let t_fit = start.elapsed().as_secs_f64() - t_start;
    if !fit.converged {
        warnings.push("optimizer stopped at its evaluation budget; best iterate reported".into());
    }
    if fit.boundary {
        warnings.push("a variance estimate lies on the zero boundary".into());
    }
    let (std_errors, ci) = intervals(&fit.x, &fit.x_cov, alpha)?;
    let mean = DVector::from_column_slice(&fit.x);
    let residuals: Vec<f64> = (DVector::from_column_slice(y) - &design.entries * mean).iter().copied().collect();
    let wv = estimate_wv(&design.epochs, &residuals, gmwm.levels, crate::wavelet::OmegaKind::Identity)?;
    let nu_model = fit.gamma.theoretical_wv_closed_form(wv.levels())?;
    Ok(EstimationResult {
        method: Method::Mle,
        iterations: 1,
        labels: design.column_labels.clone(),
        units: design.column_units.clone(),
        x_hat: fit.x,
        x_cov: fit.x_cov,
        std_errors,
        ci,
        alpha,
        gamma_hat: fit.gamma,
        objective_trace: vec![-fit.loglik],
        converged: fit.converged,
        evaluations: evaluations + fit.evaluations,
        wv,
        nu_model,
        loglik: fit.loglik.is_finite().then_some(fit.loglik),
        boundary: fit.boundary,
        warnings,
        timing: Timing {
            total_seconds: start.elapsed().as_secs_f64(),
            stages: vec![("start".into(), t_start), ("likelihood".into(), t_fit)],
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyGap {
    /// `V* - V`.
    pub difference: DMatrix<f64>,
    pub min_eigenvalue: f64,
    /// `‖B² - B‖_F`.
    pub idempotency_error: f64,
}

/// Compares the OLS sandwich `V* = n (AᵀA)⁻¹AᵀΣA(AᵀA)⁻¹` with the GLS
/// covariance `V = n (AᵀΣ⁻¹A)⁻¹`, and checks that
/// `B = Σ^{-1/2}A(AᵀΣ⁻¹A)⁻¹AᵀΣ^{-1/2}` is a projection.
pub fn efficiency_gap(a: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Result<EfficiencyGap> {
    let n = a.nrows();
    if sigma.nrows() != n || sigma.ncols() != n {
        return Err(Error::Dimension("covariance does not match the design".into()));
    }
    let p = a.ncols();
    let ata_inv = a
        .tr_mul(a)
        .try_inverse()
        .ok_or(Error::RankDeficient { rank: p.saturating_sub(1), columns: p })?;
    let v_star = &ata_inv * a.transpose() * sigma * a * &ata_inv * n as f64;

    let eig = SymmetricEigen::new(sigma.clone());
    if let Some(min) = eig.eigenvalues.iter().cloned().reduce(f64::min) {
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite {
                minor: failing_minor(sigma).unwrap_or(n),
            });
        }
    }
    let inv_sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * eig.eigenvectors.transpose();
    let wa = &inv_sqrt * a;
    let info_inv = wa
        .tr_mul(&wa)
        .try_inverse()
        .ok_or(Error::RankDeficient { rank: p.saturating_sub(1), columns: p })?;
    let v = &info_inv * n as f64;
    let b = &wa * &info_inv * wa.transpose();
    let idempotency_error = (&b * &b - &b).norm();

    let difference = v_star - v;
    let sym = (&difference + difference.transpose()) * 0.5;
    let min_eigenvalue = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok(EfficiencyGap {
        difference,
        min_eigenvalue,
        idempotency_error,
    })
}
