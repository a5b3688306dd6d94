//! Haar MODWT and the empirical wavelet variance.
//!
//! Filtering is non-circular: scale `τ_j = 2^j` yields `M_j = n - τ_j + 1`
//! coefficients. The Haar taps are `+1/τ_j` over the most recent half of the
//! window and `-1/τ_j` over the older half, computed through the pyramid
//! `V_j(t) = (V_{j-1}(t) + V_{j-1}(t-m))/2`, `W_j(t) = (V_{j-1}(t) - V_{j-1}(t-m))/2`
//! with `m = 2^{j-1}`.

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::stochastic::grid_indices;

/// Gap fractions above this are flagged on the estimate.
pub const GAP_WARNING_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaKind {
    /// `Ω_jj = M_j / (2 ν̂_j⁴)`.
    #[default]
    Diagonal,
    Identity,
}

impl FromStr for OmegaKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "diagonal" | "diag" => Ok(OmegaKind::Diagonal),
            "identity" | "id" => Ok(OmegaKind::Identity),
            other => Err(Error::InvalidInput(format!("unknown weighting `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WvEstimate {
    /// `ν̂_j²` for `j = 1..J`.
    pub nu_hat: Vec<f64>,
    /// `τ_j = 2^j`.
    pub scales: Vec<usize>,
    /// `M_j`.
    pub counts: Vec<usize>,
    #[serde(skip)]
    pub omega: DMatrix<f64>,
    /// Fraction of samples that were interpolated before filtering.
    pub gap_fraction: f64,
    pub gap_warning: bool,
}

impl WvEstimate {
    pub fn levels(&self) -> usize {
        self.nu_hat.len()
    }

    /// `(scale, nu_hat, count, omega_jj)` rows for plotting.
    pub fn table(&self) -> Vec<(usize, f64, usize, f64)> {
        (0..self.levels())
            .map(|j| (self.scales[j], self.nu_hat[j], self.counts[j], self.omega[(j, j)]))
            .collect()
    }
}

/// Largest `J` with `n ≥ 2^J`.
pub fn max_feasible_levels(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        n.ilog2() as usize
    }
}

/// Default number of scales, `floor(log2 n) - 2`, so that `M_J ≥ n/4 + 1`.
pub fn default_levels(n: usize) -> usize {
    max_feasible_levels(n).saturating_sub(2).max(1)
}

/// Haar coefficients `W_{j,t}` for `t = τ_j - 1, ..., n - 1` (0-based) and
/// `j = 1..levels`.
pub fn modwt_haar(series: &[f64], levels: usize) -> Result<Vec<Vec<f64>>> {
    let n = series.len();
    if levels == 0 {
        return Err(Error::InvalidInput("at least one wavelet level is required".into()));
    }
    let max_levels = max_feasible_levels(n);
    if levels > max_levels {
        return Err(Error::InsufficientLength { n, levels, max_levels });
    }
    let mut v = series.to_vec();
    let mut next = vec![0.0; n];
    let mut out = Vec::with_capacity(levels);
    for j in 1..=levels {
        let m = 1usize << (j - 1);
        let start = (1usize << j) - 1;
        let mut w = Vec::with_capacity(n - start);
        for t in start..n {
            let (cur, old) = (v[t], v[t - m]);
            next[t] = 0.5 * (cur + old);
            w.push(0.5 * (cur - old));
        }
        std::mem::swap(&mut v, &mut next);
        out.push(w);
    }
    Ok(out)
}

/// `ν̂_j² = (1/M_j) Σ_t W_{j,t}²`, without mean removal.
pub fn empirical_wv(coefficients: &[Vec<f64>]) -> Result<Vec<f64>> {
    coefficients
        .iter()
        .enumerate()
        .map(|(j, w)| {
            if w.is_empty() {
                Err(Error::EmptyScale { scale: 1 << (j + 1) })
            } else {
                Ok(w.iter().map(|x| x * x).sum::<f64>() / w.len() as f64)
            }
        })
        .collect()
}

/// Large-sample standard errors of `ν̂_j²` under Gaussianity,
/// `sqrt(2 A_j / M_j)` with `A_j = Σ_k s_j(k)²` the summed squared
/// autocovariance of the coefficient series, estimated from its sample
/// autocovariance as `ŝ(0)²/2 + Σ_{k≥1} ŝ(k)²`.
pub fn wv_standard_errors(coefficients: &[Vec<f64>]) -> Result<Vec<f64>> {
    let mut planner = FftPlanner::<f64>::new();
    coefficients
        .iter()
        .enumerate()
        .map(|(j, w)| {
            let m = w.len();
            if m == 0 {
                return Err(Error::EmptyScale { scale: 1 << (j + 1) });
            }
            let size = (2 * m).next_power_of_two();
            let fwd = planner.plan_fft_forward(size);
            let inv = planner.plan_fft_inverse(size);
            let mut buf: Vec<Complex<f64>> = w
                .iter()
                .map(|&x| Complex::new(x, 0.0))
                .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
                .take(size)
                .collect();
            fwd.process(&mut buf);
            for b in &mut buf {
                *b = Complex::new(b.norm_sqr(), 0.0);
            }
            inv.process(&mut buf);
            let norm = 1.0 / (size as f64 * m as f64);
            let s0 = buf[0].re * norm;
            let a = 0.5 * s0 * s0 + buf[1..m].iter().map(|c| (c.re * norm).powi(2)).sum::<f64>();
            Ok((2.0 * a / m as f64).sqrt())
        })
        .collect()
}

/// Diagonal plug-in weights `Ω_jj = M_j / (2 ν̂_j⁴)`.
pub fn default_omega(nu_hat: &[f64], counts: &[usize]) -> Result<DMatrix<f64>> {
    if nu_hat.len() != counts.len() {
        return Err(Error::Dimension("wavelet variances and counts differ in length".into()));
    }
    let mut omega = DMatrix::zeros(nu_hat.len(), nu_hat.len());
    for (j, (&v, &m)) in nu_hat.iter().zip(counts).enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::DegenerateWeight { scale: 1 << (j + 1) });
        }
        omega[(j, j)] = m as f64 / (2.0 * v * v);
    }
    Ok(omega)
}

/// Fills the integer-day grid between the first and last epoch. Missing
/// samples are linearly interpolated between their observed neighbours.
/// Returns the filled series and the interpolated fraction.
pub fn fill_gaps_for_wv(epochs: &[f64], residuals: &[f64]) -> Result<(Vec<f64>, f64)> {
    if epochs.len() != residuals.len() {
        return Err(Error::Dimension(format!(
            "{} epochs for {} residuals",
            epochs.len(),
            residuals.len()
        )));
    }
    let idx = grid_indices(epochs)?;
    let len = idx.last().map_or(0, |&l| l + 1);
    fill_on_grid(len, &idx, residuals)
}

/// Gap filling onto `0..len` where `idx` lists the observed positions.
/// Leading and trailing gaps take the nearest observed value.
pub fn fill_on_grid(len: usize, idx: &[usize], values: &[f64]) -> Result<(Vec<f64>, f64)> {
    if idx.is_empty() {
        return Err(Error::InvalidInput("no observed samples to fill from".into()));
    }
    if idx.windows(2).any(|w| w[1] <= w[0]) || idx.last().is_some_and(|&l| l >= len) {
        return Err(Error::InvalidInput("observed positions must increase inside the grid".into()));
    }
    let mut out = vec![0.0; len];
    let first = idx[0];
    let last = *idx.last().unwrap_or(&first);
    out[..first].fill(values[0]);
    out[last..].fill(values[values.len() - 1]);
    for (k, w) in idx.windows(2).enumerate() {
        let (i0, i1) = (w[0], w[1]);
        let (y0, y1) = (values[k], values[k + 1]);
        out[i0] = y0;
        let span = (i1 - i0) as f64;
        for i in i0 + 1..i1 {
            let f = (i - i0) as f64 / span;
            out[i] = y0 + f * (y1 - y0);
        }
    }
    let filled = len - idx.len();
    Ok((out, filled as f64 / len as f64))
}

/// Gap filling, Haar filtering, wavelet variances and weights in one call.
/// `levels = None` selects [`default_levels`] of the filled length.
pub fn estimate_wv(
    epochs: &[f64],
    residuals: &[f64],
    levels: Option<usize>,
    omega: OmegaKind,
) -> Result<WvEstimate> {
    let (filled, gap_fraction) = fill_gaps_for_wv(epochs, residuals)?;
    wv_of_series(&filled, levels, omega, gap_fraction)
}

/// Wavelet variance estimate of a contiguous series.
pub fn wv_of_series(
    series: &[f64],
    levels: Option<usize>,
    omega: OmegaKind,
    gap_fraction: f64,
) -> Result<WvEstimate> {
    let levels = levels.unwrap_or_else(|| default_levels(series.len()));
    let coefficients = modwt_haar(series, levels)?;
    let nu_hat = empirical_wv(&coefficients)?;
    let counts: Vec<usize> = coefficients.iter().map(Vec::len).collect();
    let omega = match omega {
        OmegaKind::Diagonal => default_omega(&nu_hat, &counts)?,
        OmegaKind::Identity => DMatrix::identity(levels, levels),
    };
    Ok(WvEstimate {
        nu_hat,
        scales: (1..=levels).map(|j| 1usize << j).collect(),
        counts,
        omega,
        gap_fraction,
        gap_warning: gap_fraction > GAP_WARNING_FRACTION,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::haar_filter;

    /// Direct convolution with the explicit filter taps.
    fn convolve(series: &[f64], j: usize) -> Vec<f64> {
        let h = haar_filter(j);
        let tau = h.len();
        (tau - 1..series.len())
            .map(|t| (0..tau).map(|l| h[l] * series[t - l]).sum())
            .collect()
    }

    #[test]
    fn pyramid_matches_direct_filtering() {
        let x: Vec<f64> = (0..200).map(|i| ((i * 37 % 101) as f64).sqrt() - 5.0).collect();
        let w = modwt_haar(&x, 6).unwrap();
        for j in 1..=6 {
            let direct = convolve(&x, j);
            assert_eq!(w[j - 1].len(), direct.len());
            for (a, b) in w[j - 1].iter().zip(&direct) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_series_is_annihilated() {
        let w = modwt_haar(&[3.7; 64], 5).unwrap();
        assert!(w.iter().flatten().all(|&c| c == 0.0));
        assert_eq!(empirical_wv(&w).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn alternating_series() {
        let x: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let w = modwt_haar(&x, 1).unwrap();
        assert_eq!(w[0].len(), 9);
        for (k, c) in w[0].iter().enumerate() {
            // t = k + 1; x_t - x_{t-1} over two
            let want = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(*c, want);
        }
    }

    #[test]
    fn coefficient_counts() {
        let w = modwt_haar(&vec![0.0; 100], 3).unwrap();
        assert_eq!(w[2].len(), 93);
        assert_eq!(
            modwt_haar(&vec![0.0; 100], 7),
            Err(Error::InsufficientLength {
                n: 100,
                levels: 7,
                max_levels: 6
            })
        );
        assert_eq!(default_levels(100), 4);
        assert_eq!(default_levels(4096), 10);
    }

    #[test]
    fn mean_of_squares() {
        assert_eq!(empirical_wv(&[vec![1.0, -1.0, 1.0, -1.0]]).unwrap(), vec![1.0]);
        assert_eq!(empirical_wv(&[vec![0.0; 4]]).unwrap(), vec![0.0]);
        assert_eq!(empirical_wv(&[vec![]]), Err(Error::EmptyScale { scale: 2 }));
    }

    #[test]
    fn linear_trend_gives_constant_coefficients() {
        let beta = 0.5;
        let x: Vec<f64> = (0..256).map(|t| beta * t as f64).collect();
        let w = modwt_haar(&x, 6).unwrap();
        let nu = empirical_wv(&w).unwrap();
        for j in 1..=6 {
            let tau = (1usize << j) as f64;
            assert!(w[j - 1].iter().all(|&c| (c - beta * tau / 4.0).abs() < 1e-12));
            assert!((nu[j - 1] - (beta * tau / 4.0).powi(2)).abs() < 1e-9);
        }
    }

    #[test]
    fn omega_plug_in() {
        let o = default_omega(&[1.0, 1.0], &[8, 8]).unwrap();
        assert_eq!(o, DMatrix::from_diagonal_element(2, 2, 4.0));
        let o2 = default_omega(&[2.0, 2.0], &[8, 8]).unwrap();
        assert_eq!(o2, o / 4.0);
        assert_eq!(
            default_omega(&[1.0, 0.0], &[8, 8]),
            Err(Error::DegenerateWeight { scale: 4 })
        );
        let est = wv_of_series(&[0.0; 16], Some(2), OmegaKind::Identity, 0.0).unwrap();
        assert_eq!(est.omega, DMatrix::identity(2, 2));
    }

    #[test]
    fn gap_filling() {
        let (f, frac) = fill_gaps_for_wv(&[0.0, 2.0], &[0.0, 2.0]).unwrap();
        assert_eq!(f, vec![0.0, 1.0, 2.0]);
        assert!((frac - 1.0 / 3.0).abs() < 1e-15);
        let (f, frac) = fill_gaps_for_wv(&[5.0, 6.0, 7.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f, vec![1.0, 2.0, 3.0]);
        assert_eq!(frac, 0.0);
        let (f, _) = fill_on_grid(6, &[1, 3], &[4.0, 8.0]).unwrap();
        assert_eq!(f, vec![4.0, 4.0, 6.0, 8.0, 8.0, 8.0]);
        let est = estimate_wv(&[0.0, 1.0, 4.0, 5.0, 6.0, 7.0], &[1.0; 6], Some(1), OmegaKind::Identity)
            .unwrap();
        assert!(!est.gap_warning);
        let est = estimate_wv(&[0.0, 5.0, 6.0, 7.0], &[1.0; 4], Some(1), OmegaKind::Identity).unwrap();
        assert!(est.gap_warning);
    }

    #[test]
    fn standard_errors_for_uncorrelated_coefficients() {
        // a single coefficient: A = s0²/2, se = s0 = ν̂
        let se = wv_standard_errors(&[vec![2.0]]).unwrap();
        assert!((se[0] - 4.0).abs() < 1e-12);
        // brute-force sample autocovariance route
        let w: Vec<f64> = (0..50).map(|i| ((i * 13 % 7) as f64) - 3.0).collect();
        let m = w.len();
        let s = |k: usize| (0..m - k).map(|t| w[t] * w[t + k]).sum::<f64>() / m as f64;
        let a = 0.5 * s(0).powi(2) + (1..m).map(|k| s(k).powi(2)).sum::<f64>();
        let got = wv_standard_errors(&[w.clone()]).unwrap()[0];
        assert!((got - (2.0 * a / m as f64).sqrt()).abs() < 1e-12);
    }
}
