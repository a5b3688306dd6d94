//! Structured and dense factorizations of stationary covariance matrices.
//!
//! On a contiguous daily grid the covariance is symmetric Toeplitz and the
//! Durbin-Levinson recursion applies its Cholesky factor (or inverse) in
//! `O(n^2)` time and `O(n)` memory. Gapped grids fall back to a dense
//! Cholesky of the observed subset.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Runs the Durbin-Levinson recursion over `acvf[0..n]`, calling
/// `step(t, b, v_t)` with `b[i] = φ_{t, t-i}` for `i < t` (the one-step
/// predictor of `x_t` from `x_0..x_{t-1}`) and `v_t` its error variance.
fn levinson<F: FnMut(usize, &[f64], f64)>(acvf: &[f64], mut step: F) -> Result<()> {
    let n = acvf.len();
    if n == 0 {
        return Ok(());
    }
    let mut v = acvf[0];
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::NotPositiveDefinite { minor: 1 });
    }
    let mut b = vec![0.0; n];
    let mut prev = vec![0.0; n];
    step(0, &b[..0], v);
    for t in 1..n {
        // b holds φ_{t-1, t-1-i}
        let kappa = (acvf[t] - dot(&b[..t - 1], &acvf[1..t])) / v;
        prev[..t - 1].copy_from_slice(&b[..t - 1]);
        b[0] = kappa;
        for i in 1..t {
            b[i] = prev[i - 1] - kappa * prev[t - 1 - i];
        }
        v *= 1.0 - kappa * kappa;
        if !(v > 0.0 && v.is_finite() && kappa.abs() < 1.0) {
            return Err(Error::NotPositiveDefinite { minor: t + 1 });
        }
        step(t, &b[..t], v);
    }
    Ok(())
}

/// Inner product with independent partial sums so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Applies `L^{-1}` to every column of `data`, where `T(acvf) = L L^T`.
/// Returns the whitened columns and `log det T`.
pub fn toeplitz_whiten(acvf: &[f64], data: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let n = data.nrows();
    if acvf.len() < n {
        return Err(Error::Dimension(format!(
            "autocovariance of length {} cannot whiten {n} rows",
            acvf.len()
        )));
    }
    let cols = data.ncols();
    let src = data.as_slice();
    let mut out = DMatrix::<f64>::zeros(n, cols);
    let mut logdet = 0.0;
    {
        let dst = out.as_mut_slice();
        levinson(&acvf[..n], |t, b, v| {
            let s = v.sqrt();
            logdet += v.ln();
            for c in 0..cols {
                let x = &src[c * n..(c + 1) * n];
                dst[c * n + t] = (x[t] - dot(b, &x[..t])) / s;
            }
        })?;
    }
    Ok((out, logdet))
}

/// `log det T(acvf)` through the innovation variances.
pub fn toeplitz_logdet(acvf: &[f64]) -> Result<f64> {
    let mut logdet = 0.0;
    levinson(acvf, |_, _, v| logdet += v.ln())?;
    Ok(logdet)
}

/// Returns `L z` with `T(acvf[..z.len()]) = L L^T` and `L` the lower
/// Cholesky factor.
pub fn toeplitz_color(acvf: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    let n = z.len();
    if acvf.len() < n {
        return Err(Error::Dimension(format!(
            "autocovariance of length {} cannot color {n} samples",
            acvf.len()
        )));
    }
    let mut x = vec![0.0; n];
    levinson(&acvf[..n], |t, b, v| {
        x[t] = dot(b, &x[..t]) + v.sqrt() * z[t];
    })?;
    Ok(x)
}

/// Symmetric Toeplitz matrix-vector products by circulant embedding.
pub struct ToeplitzMatvec {
    n: usize,
    eig: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl ToeplitzMatvec {
    /// `acvf[0..n]` is the first column.
    pub fn new(acvf: &[f64]) -> Self {
        let n = acvf.len().max(1);
        let m = (2 * n - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let mut eig = vec![Complex::new(0.0, 0.0); m];
        for (k, &r) in acvf.iter().enumerate() {
            eig[k].re = r;
            if k > 0 {
                eig[m - k].re = r;
            }
        }
        forward.process(&mut eig);
        let scale = 1.0 / m as f64;
        for e in &mut eig {
            *e *= scale;
        }
        Self {
            n: acvf.len(),
            eig,
            forward,
            inverse,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "vector length must match the Toeplitz order");
        let mut buf = vec![Complex::new(0.0, 0.0); self.eig.len()];
        for (slot, &v) in buf.iter_mut().zip(x) {
            slot.re = v;
        }
        self.forward.process(&mut buf);
        for (b, e) in buf.iter_mut().zip(&self.eig) {
            *b *= e;
        }
        self.inverse.process(&mut buf);
        buf[..self.n].iter().map(|c| c.re).collect()
    }

    /// Product with the gap-subset matrix: rows and columns restricted to
    /// the grid positions `idx`.
    pub fn apply_subset(&self, idx: &[usize], x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n];
        for (&i, &v) in idx.iter().zip(x) {
            full[i] = v;
        }
        let y = self.apply(&full);
        idx.iter().map(|&i| y[i]).collect()
    }
}

/// Order of the first leading minor at which an unpivoted Cholesky breaks
/// down; `None` when the matrix is numerically positive definite.
pub fn failing_minor(m: &DMatrix<f64>) -> Option<usize> {
    let n = m.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0 && d.is_finite()) {
            return Some(j + 1);
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    None
}

/// Dense Cholesky factor `L` with `m = L L^T`.
pub fn cholesky(m: &DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
    }
    match m.clone().cholesky() {
        Some(c) => Ok(c),
        None => Err(Error::NotPositiveDefinite {
            minor: failing_minor(m).unwrap_or(m.nrows()),
        }),
    }
}

/// Factorization of the residual covariance on a set of observed epochs.
pub enum CovarianceFactor {
    /// Contiguous grid: Toeplitz with first column `acvf`.
    Toeplitz { acvf: Vec<f64> },
    /// Gapped grid: dense Cholesky of the observed subset.
    Dense {
        chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    },
}

impl CovarianceFactor {
    /// Chooses the Toeplitz path when `idx` is `0..n` and the dense path
    /// otherwise. `acvf` must reach the largest lag in `idx`.
    pub fn new(acvf: &[f64], idx: &[usize]) -> Result<Self> {
        let contiguous = idx.iter().enumerate().all(|(k, &i)| k == i);
        if contiguous {
            if acvf.len() < idx.len() {
                return Err(Error::Dimension("autocovariance shorter than the grid".into()));
            }
            Ok(CovarianceFactor::Toeplitz {
                acvf: acvf[..idx.len()].to_vec(),
            })
        } else {
            let n = idx.len();
            let sigma = DMatrix::from_fn(n, n, |i, j| acvf[idx[i].abs_diff(idx[j])]);
            Ok(CovarianceFactor::Dense { chol: cholesky(&sigma)? })
        }
    }

    pub fn from_dense(sigma: &DMatrix<f64>) -> Result<Self> {
        Ok(CovarianceFactor::Dense { chol: cholesky(sigma)? })
    }

    /// `(L^{-1} data, log det Σ)`.
    pub fn whiten(&self, data: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
        match self {
            CovarianceFactor::Toeplitz { acvf } => toeplitz_whiten(acvf, data),
            CovarianceFactor::Dense { chol } => {
                let l = chol.l_dirty();
                let w = l
                    .solve_lower_triangular(data)
                    .ok_or(Error::NotPositiveDefinite { minor: l.nrows() })?;
                let logdet = 2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>();
                Ok((w, logdet))
            }
        }
    }
}

/// Column-stacks `a` and `y` into one matrix.
pub(crate) fn hstack(a: &DMatrix<f64>, y: &[f64]) -> DMatrix<f64> {
    let mut m = a.clone().insert_column(a.ncols(), 0.0);
    m.set_column(a.ncols(), &DVector::from_column_slice(y));
    m
}
