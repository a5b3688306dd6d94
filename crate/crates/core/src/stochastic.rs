//! Composite stationary noise models and their second-order summaries.
//!
//! A [`StochasticModel`] is a sum of independent components. Each component
//! contributes an autocovariance sequence; the sum gives the covariance of
//! the residual vector on any (possibly gapped) integer-day grid and the
//! Haar wavelet variance at dyadic scales.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::special::bessel_k;

/// Tolerance (days) on the integer-day spacing of epochs; daily solutions
/// time-tagged a few seconds apart still land on the same grid.
pub const SPACING_TOL: f64 = 1e-3;

/// Above this filter length the brute-force wavelet variance switches from
/// explicit tap sums to lag counting.
const EXPLICIT_FILTER_MAX: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Component {
    White {
        sigma2: f64,
    },
    /// Stationary fractionally differenced noise; `sigma2` is the innovation
    /// variance and `d` the memory parameter.
    #[serde(rename = "powerlaw", alias = "power_law")]
    PowerLaw { sigma2: f64, d: f64 },
    /// Matérn covariance with range `lambda` (1/day) and smoothness `nu`.
    Matern { sigma2: f64, lambda: f64, nu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    White,
    #[serde(rename = "powerlaw")]
    PowerLaw,
    Matern,
}

impl ComponentKind {
    pub fn n_params(self) -> usize {
        match self {
            ComponentKind::White => 1,
            ComponentKind::PowerLaw => 2,
            ComponentKind::Matern => 3,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ComponentKind::White => &["sigma2"],
            ComponentKind::PowerLaw => &["sigma2", "d"],
            ComponentKind::Matern => &["sigma2", "lambda", "nu"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::White => "white",
            ComponentKind::PowerLaw => "powerlaw",
            ComponentKind::Matern => "matern",
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComponentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "white" | "wn" => Ok(ComponentKind::White),
            "powerlaw" | "power_law" | "pl" => Ok(ComponentKind::PowerLaw),
            "matern" | "mat" => Ok(ComponentKind::Matern),
            other => Err(Error::InvalidInput(format!("unknown noise component `{other}`"))),
        }
    }
}

impl Component {
    pub fn kind(&self) -> ComponentKind {
        match self {
            Component::White { .. } => ComponentKind::White,
            Component::PowerLaw { .. } => ComponentKind::PowerLaw,
            Component::Matern { .. } => ComponentKind::Matern,
        }
    }

    pub fn sigma2(&self) -> f64 {
        match *self {
            Component::White { sigma2 }
            | Component::PowerLaw { sigma2, .. }
            | Component::Matern { sigma2, .. } => sigma2,
        }
    }

    pub fn with_sigma2(&self, sigma2: f64) -> Component {
        let mut c = *self;
        match &mut c {
            Component::White { sigma2: s }
            | Component::PowerLaw { sigma2: s, .. }
            | Component::Matern { sigma2: s, .. } => *s = sigma2,
        }
        c
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Component::White { sigma2 } => vec![sigma2],
            Component::PowerLaw { sigma2, d } => vec![sigma2, d],
            Component::Matern { sigma2, lambda, nu } => vec![sigma2, lambda, nu],
        }
    }

    pub fn from_params(kind: ComponentKind, p: &[f64]) -> Component {
        match kind {
            ComponentKind::White => Component::White { sigma2: p[0] },
            ComponentKind::PowerLaw => Component::PowerLaw { sigma2: p[0], d: p[1] },
            ComponentKind::Matern => Component::Matern {
                sigma2: p[0],
                lambda: p[1],
                nu: p[2],
            },
        }
    }

    /// Zero variance is admitted as the degenerate limit; negative variances
    /// and shape parameters outside the stationarity region are not.
    pub fn validate(&self) -> Result<()> {
        let s2 = self.sigma2();
        if !(s2.is_finite() && s2 >= 0.0) {
            return Err(Error::Domain(format!("{} variance {s2} must be non-negative", self.kind())));
        }
        match *self {
            Component::White { .. } => {}
            Component::PowerLaw { d, .. } => {
                if !(d > 0.0 && d < 0.5) {
                    return Err(Error::Domain(format!(
                        "power-law memory parameter d = {d} is outside (0, 0.5)"
                    )));
                }
            }
            Component::Matern { lambda, nu, .. } => {
                if !(lambda.is_finite() && lambda > 0.0) {
                    return Err(Error::Domain(format!("Matérn range lambda = {lambda} must be positive")));
                }
                if !(nu.is_finite() && nu > 0.0) {
                    return Err(Error::Domain(format!("Matérn smoothness nu = {nu} must be positive")));
                }
            }
        }
        Ok(())
    }

    /// Autocovariance at lags `0..=max_lag`. Assumes a validated component.
    fn fill_autocovariances(&self, out: &mut [f64]) {
        match *self {
            Component::White { sigma2 } => {
                if let Some(first) = out.first_mut() {
                    *first += sigma2;
                }
            }
            Component::PowerLaw { sigma2, d } => {
                if sigma2 == 0.0 {
                    return;
                }
                let mut g = sigma2 * (ln_gamma(1.0 - 2.0 * d) - 2.0 * ln_gamma(1.0 - d)).exp();
                for (k, slot) in out.iter_mut().enumerate() {
                    if k > 0 {
                        let kf = k as f64;
                        g *= (kf - 1.0 + d) / (kf - d);
                    }
                    *slot += g;
                }
            }
            Component::Matern { sigma2, lambda, nu } => {
                if sigma2 == 0.0 {
                    return;
                }
                let log_norm = (1.0 - nu) * std::f64::consts::LN_2 - ln_gamma(nu);
                for (k, slot) in out.iter_mut().enumerate() {
                    if k == 0 {
                        *slot += sigma2;
                        continue;
                    }
                    let x = lambda * k as f64;
                    let kv = bessel_k(nu, x);
                    if kv == 0.0 {
                        // the remaining lags underflow as well
                        break;
                    }
                    *slot += sigma2 * (log_norm + nu * x.ln() + kv.ln()).exp();
                }
            }
        }
    }
}

/// Ordered list of component kinds; the shape of a parameter vector `γ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModelFamily(pub Vec<ComponentKind>);

impl ModelFamily {
    pub fn new(kinds: Vec<ComponentKind>) -> Self {
        Self(kinds)
    }

    pub fn kinds(&self) -> &[ComponentKind] {
        &self.0
    }

    pub fn n_params(&self) -> usize {
        self.0.iter().map(|k| k.n_params()).sum()
    }

    /// Qualified names such as `powerlaw.d`, in parameter-vector order.
    pub fn param_names(&self) -> Vec<String> {
        self.0
            .iter()
            .flat_map(|k| k.param_names().iter().map(move |p| format!("{}.{}", k.name(), p)))
            .collect()
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|k| k.name()).collect();
        f.write_str(&names.join("+"))
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    /// Parses `white+powerlaw`, `wn+pl`, `white+matern`, ...
    fn from_str(s: &str) -> Result<Self> {
        let kinds = s
            .split(['+', ','])
            .filter(|p| !p.trim().is_empty())
            .map(ComponentKind::from_str)
            .collect::<Result<Vec<_>>>()?;
        if kinds.is_empty() {
            return Err(Error::InvalidInput("empty noise model".into()));
        }
        Ok(ModelFamily(kinds))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StochasticModel {
    pub components: Vec<Component>,
}

impl StochasticModel {
    pub fn new(components: Vec<Component>) -> Self {
        Self { components }
    }

    pub fn white(sigma2: f64) -> Self {
        Self::new(vec![Component::White { sigma2 }])
    }

    pub fn power_law(sigma2: f64, d: f64) -> Self {
        Self::new(vec![Component::PowerLaw { sigma2, d }])
    }

    pub fn matern(sigma2: f64, lambda: f64, nu: f64) -> Self {
        Self::new(vec![Component::Matern { sigma2, lambda, nu }])
    }

    /// Sum of two independent models.
    pub fn plus(mut self, other: &StochasticModel) -> Self {
        self.components.extend_from_slice(&other.components);
        self
    }

    pub fn family(&self) -> ModelFamily {
        ModelFamily(self.components.iter().map(Component::kind).collect())
    }

    /// The concatenated parameter vector `γ`.
    pub fn params(&self) -> Vec<f64> {
        self.components.iter().flat_map(Component::params).collect()
    }

    pub fn from_params(family: &ModelFamily, params: &[f64]) -> Result<Self> {
        if params.len() != family.n_params() {
            return Err(Error::Dimension(format!(
                "{} parameters supplied for family {family} with {}",
                params.len(),
                family.n_params()
            )));
        }
        let mut offset = 0;
        let components = family
            .kinds()
            .iter()
            .map(|&k| {
                let c = Component::from_params(k, &params[offset..offset + k.n_params()]);
                offset += k.n_params();
                c
            })
            .collect();
        Ok(Self { components })
    }

    /// Multiply every component variance by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.components.iter().map(|c| c.with_sigma2(c.sigma2() * k)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::Domain("noise model has no components".into()));
        }
        self.components.iter().try_for_each(Component::validate)
    }

    /// `γ(0), ..., γ(max_lag)`.
    pub fn autocovariances(&self, max_lag: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let mut out = vec![0.0; max_lag + 1];
        for c in &self.components {
            c.fill_autocovariances(&mut out);
        }
        Ok(out)
    }

    pub fn autocovariance(&self, lag: usize) -> Result<f64> {
        Ok(self.autocovariances(lag)?[lag])
    }

    /// Haar wavelet variance at scales `2^1..2^levels` through the
    /// definitional quadratic form over the explicit filter taps.
    pub fn theoretical_wv(&self, levels: usize) -> Result<Vec<f64>> {
        check_levels(levels)?;
        let acvf = self.autocovariances(1 << levels)?;
        Ok((1..=levels).map(|j| filter_quadratic_form(j, &acvf)).collect())
    }

    /// Haar wavelet variance through the lag-weighted closed form in the
    /// autocovariance sequence; `O(2^levels)` overall.
    pub fn theoretical_wv_closed_form(&self, levels: usize) -> Result<Vec<f64>> {
        check_levels(levels)?;
        let acvf = self.autocovariances(1 << levels)?;
        Ok(closed_form_wv(&acvf, levels))
    }

    /// Covariance matrix of the residuals observed at `epochs` (days): the
    /// gap subset of the full-grid Toeplitz matrix.
    pub fn covariance_matrix(&self, epochs: &[f64]) -> Result<DMatrix<f64>> {
        let idx = grid_indices(epochs)?;
        let max_lag = idx.last().copied().unwrap_or(0);
        let acvf = self.autocovariances(max_lag)?;
        let n = idx.len();
        Ok(DMatrix::from_fn(n, n, |i, j| acvf[idx[i].abs_diff(idx[j])]))
    }
}

fn check_levels(levels: usize) -> Result<()> {
    if levels == 0 || levels > 30 {
        return Err(Error::InvalidInput(format!("number of scales {levels} must be in 1..=30")));
    }
    Ok(())
}

/// Integer grid positions of `epochs` relative to the first one.
pub(crate) fn grid_indices(epochs: &[f64]) -> Result<Vec<usize>> {
    crate::functional::check_increasing(epochs)?;
    let Some(&first) = epochs.first() else {
        return Ok(Vec::new());
    };
    epochs
        .iter()
        .map(|&t| {
            let off = t - first;
            let r = off.round();
            if (off - r).abs() > SPACING_TOL {
                Err(Error::InvalidInput(format!(
                    "epoch {t} is not an integer number of days after {first}"
                )))
            } else {
                Ok(r as usize)
            }
        })
        .collect()
}

/// Haar MODWT filter at scale `2^j`: `+1/τ` on the most recent half of the
/// window, `-1/τ` on the older half. White noise of variance σ² then has
/// wavelet variance σ²/τ.
pub fn haar_filter(j: usize) -> Vec<f64> {
    let tau = 1usize << j;
    let half = tau / 2;
    let w = 1.0 / tau as f64;
    (0..tau).map(|l| if l < half { w } else { -w }).collect()
}

fn filter_quadratic_form(j: usize, acvf: &[f64]) -> f64 {
    let tau = 1usize << j;
    if tau <= EXPLICIT_FILTER_MAX {
        let h = haar_filter(j);
        // sum_{l,m} h_l h_m γ(|l-m|) collected by lag
        let mut total = 0.0;
        for lag in 0..tau {
            let a: f64 = (0..tau - lag).map(|l| h[l] * h[l + lag]).sum();
            let weight = if lag == 0 { 1.0 } else { 2.0 };
            total += weight * a * acvf[lag];
        }
        total
    } else {
        // same-sign pairs inside each half minus cross pairs, per lag
        let half = (tau / 2) as i64;
        let tau_f = tau as f64;
        let mut total = 0.0;
        for lag in 0..tau as i64 {
            let same = 2 * (half - lag).max(0);
            let cross = lag.min(tau as i64 - lag);
            let a = (same - cross) as f64 / (tau_f * tau_f);
            let weight = if lag == 0 { 1.0 } else { 2.0 };
            total += weight * a * acvf[lag as usize];
        }
        total
    }
}

/// `ν_j² = 2^{-(2j-1)} [ m (γ0 - γ(m)) + Σ_{i=1}^{m-1} i (2γ(m-i) - γ(i) - γ(2m-i)) ]`
/// with `m = 2^{j-1}`. `acvf` must cover lags up to `2^levels - 1`.
pub(crate) fn closed_form_wv(acvf: &[f64], levels: usize) -> Vec<f64> {
    (1..=levels)
        .map(|j| {
            let m = 1usize << (j - 1);
            let mut bracket = m as f64 * (acvf[0] - acvf[m]);
            for i in 1..m {
                bracket += i as f64 * (2.0 * acvf[m - i] - acvf[i] - acvf[2 * m - i]);
            }
            bracket / (1u64 << (2 * j - 1)) as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent route to the fractional-noise autocovariance:
    /// `γ(k) = σ² Γ(1-2d) Γ(k+d) / (Γ(d) Γ(1-d) Γ(k+1-d))`.
    fn pl_acvf_gamma_route(sigma2: f64, d: f64, k: usize) -> f64 {
        let k = k as f64;
        sigma2
            * (ln_gamma(1.0 - 2.0 * d) + ln_gamma(k + d)
                - ln_gamma(d)
                - ln_gamma(1.0 - d)
                - ln_gamma(k + 1.0 - d))
            .exp()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn white_noise_autocovariance() {
        let m = StochasticModel::white(15.0);
        assert_eq!(m.autocovariances(3).unwrap(), vec![15.0, 0.0, 0.0, 0.0]);
        assert_eq!(m.autocovariance(0).unwrap(), 15.0);
        assert_eq!(m.autocovariance(7).unwrap(), 0.0);
    }

    #[test]
    fn power_law_lag_one_ratio() {
        let g = StochasticModel::power_law(10.0, 0.4).autocovariances(1).unwrap();
        assert!((g[1] / g[0] - 2.0 / 3.0).abs() < 1e-14);
        let g = StochasticModel::power_law(10.0, 1e-9).autocovariances(1).unwrap();
        assert!(g[1] / g[0] < 1e-8);
        assert!((g[0] - 10.0).abs() < 1e-6);
    }

    #[test]
    fn power_law_recursion_matches_gamma_route() {
        for &d in &[0.05, 0.2, 0.4, 0.49] {
            let g = StochasticModel::power_law(3.0, d).autocovariances(2000).unwrap();
            for k in [0usize, 1, 2, 17, 500, 2000] {
                assert!(rel(g[k], pl_acvf_gamma_route(3.0, d, k)) < 1e-10, "d={d} k={k}");
            }
        }
        let m = StochasticModel::power_law(10.0, 0.4);
        assert!(rel(m.autocovariance(37).unwrap(), pl_acvf_gamma_route(10.0, 0.4, 37)) < 1e-12);
    }

    #[test]
    fn matern_half_integer_forms() {
        let m = StochasticModel::matern(4.0, 0.3, 0.5);
        let g = m.autocovariances(20).unwrap();
        for (k, gk) in g.iter().enumerate() {
            assert!(rel(*gk, 4.0 * (-0.3 * k as f64).exp()) < 1e-12);
        }
        let m = StochasticModel::matern(2.0, 0.1, 1.5);
        for k in [1usize, 5, 40] {
            let x = 0.1 * k as f64;
            let want = 2.0 * (1.0 + x) * (-x).exp();
            assert!(rel(m.autocovariance(k).unwrap(), want) < 1e-12);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            StochasticModel::power_law(1.0, 0.5).autocovariances(3),
            Err(Error::Domain(_))
        ));
        assert!(StochasticModel::power_law(1.0, 0.0).autocovariance(1).is_err());
        assert!(StochasticModel::white(-1.0).autocovariance(0).is_err());
        assert!(StochasticModel::matern(1.0, 0.0, 1.0).autocovariance(1).is_err());
        assert!(StochasticModel::matern(1.0, 1.0, -1.0).autocovariance(1).is_err());
        assert!(StochasticModel::new(vec![]).autocovariance(0).is_err());
    }

    #[test]
    fn covariance_matrix_subsetting() {
        let m = StochasticModel::power_law(10.0, 0.4);
        let g = m.autocovariances(3).unwrap();
        let s = m.covariance_matrix(&[0.0, 1.0, 3.0]).unwrap();
        assert_eq!(s[(0, 2)], g[3]);
        assert_eq!(s[(1, 2)], g[2]);
        assert_eq!(s[(2, 1)], g[2]);
        let w = StochasticModel::white(2.0).covariance_matrix(&[0.0, 2.0, 5.0]).unwrap();
        assert_eq!(w, DMatrix::identity(3, 3) * 2.0);
        assert!(m.covariance_matrix(&[0.0, 1.5]).is_err());
    }

    #[test]
    fn covariance_is_positive_definite() {
        let m = StochasticModel::power_law(10.0, 0.4).plus(&StochasticModel::white(15.0));
        let epochs: Vec<f64> = (0..64).map(f64::from).collect();
        let s = m.covariance_matrix(&epochs).unwrap();
        let g0 = StochasticModel::power_law(10.0, 0.4).autocovariance(0).unwrap();
        assert!((s[(10, 10)] - (g0 + 15.0)).abs() < 1e-12);
        assert!(s.cholesky().is_some());
    }

    #[test]
    fn white_noise_wavelet_variance() {
        let m = StochasticModel::white(1.0);
        let brute = m.theoretical_wv(6).unwrap();
        let closed = m.theoretical_wv_closed_form(6).unwrap();
        assert!((brute[0] - 0.5).abs() < 1e-15);
        assert!((closed[0] - 0.5).abs() < 1e-15);
        for j in 1..=6 {
            assert!(rel(brute[j - 1], 1.0 / (1u64 << j) as f64) < 1e-13);
            assert!(rel(closed[j - 1], 1.0 / (1u64 << j) as f64) < 1e-13);
        }
        let zero = StochasticModel::white(0.0).plus(&StochasticModel::power_law(0.0, 0.3));
        assert!(zero.theoretical_wv(5).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn brute_force_agrees_with_closed_form() {
        let pl = StochasticModel::power_law(10.0, 0.4);
        let sum = pl.clone().plus(&StochasticModel::white(15.0));
        for model in [pl, sum] {
            let a = model.theoretical_wv(10).unwrap();
            let b = model.theoretical_wv_closed_form(10).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!(rel(*x, *y) < 1e-8, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn lag_counting_matches_explicit_taps() {
        let m = StochasticModel::power_law(1.0, 0.3);
        let acvf = m.autocovariances(1 << 11).unwrap();
        for j in 1..=11 {
            let explicit = filter_quadratic_form(j, &acvf);
            let tau = 1usize << j;
            let half = (tau / 2) as i64;
            let counted: f64 = (0..tau as i64)
                .map(|lag| {
                    let a = (2 * (half - lag).max(0) - lag.min(tau as i64 - lag)) as f64
                        / (tau * tau) as f64;
                    (if lag == 0 { a } else { 2.0 * a }) * acvf[lag as usize]
                })
                .sum();
            assert!(rel(explicit, counted) < 1e-12);
        }
    }

    #[test]
    fn additivity_and_scaling() {
        let a = StochasticModel::power_law(2.0, 0.25);
        let b = StochasticModel::matern(3.0, 0.2, 1.2);
        let sum = a.clone().plus(&b);
        let (va, vb, vs) = (
            a.theoretical_wv(8).unwrap(),
            b.theoretical_wv(8).unwrap(),
            sum.theoretical_wv(8).unwrap(),
        );
        for j in 0..8 {
            assert!(rel(vs[j], va[j] + vb[j]) < 1e-13);
        }
        let k = 3.5;
        let vk = sum.scaled(k).theoretical_wv(8).unwrap();
        for j in 0..8 {
            assert!(rel(vk[j], k * vs[j]) < 1e-13);
            assert!(vs[j] > 0.0);
        }
        let epochs = [0.0, 1.0, 4.0, 9.0];
        let s = sum.covariance_matrix(&epochs).unwrap();
        let sk = sum.scaled(k).covariance_matrix(&epochs).unwrap();
        assert!((sk - s * k).abs().max() < 1e-12);
    }

    #[test]
    fn short_range_matern_is_near_white() {
        let m = StochasticModel::matern(5.0, 20.0, 1.0);
        let g = m.autocovariances(10).unwrap();
        assert!(g[1..].iter().all(|v| (v / g[0]).abs() < 1e-6));
        let wv = m.theoretical_wv(10).unwrap();
        for j in 6..=10 {
            assert!(rel(wv[j - 1], g[0] / (1u64 << j) as f64) < 0.01);
        }
    }

    #[test]
    fn family_parsing() {
        let f: ModelFamily = "white+powerlaw".parse().unwrap();
        assert_eq!(f.kinds(), &[ComponentKind::White, ComponentKind::PowerLaw]);
        assert_eq!(f.n_params(), 3);
        assert_eq!(f.to_string(), "white+powerlaw");
        assert_eq!(
            f.param_names(),
            vec!["white.sigma2", "powerlaw.sigma2", "powerlaw.d"]
        );
        assert_eq!("wn+matern".parse::<ModelFamily>().unwrap().n_params(), 4);
        assert!("white+ar1".parse::<ModelFamily>().is_err());
        let m = StochasticModel::from_params(&f, &[15.0, 10.0, 0.4]).unwrap();
        assert_eq!(m.params(), vec![15.0, 10.0, 0.4]);
        assert_eq!(m.family(), f);
    }

    #[test]
    fn serde_descriptor() {
        let json = r#"[{"type":"white","sigma2":15},{"type":"powerlaw","sigma2":10,"d":0.4}]"#;
        let m: StochasticModel = serde_json::from_str(json).unwrap();
        assert_eq!(m, StochasticModel::white(15.0).plus(&StochasticModel::power_law(10.0, 0.4)));
    }
}
