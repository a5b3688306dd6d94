//! Trajectory (functional) model of a daily position series.
//!
//! A row of the design matrix holds, in this order: the intercept, the
//! velocity ramp `(t - t0) / 365.25` (so the velocity is in mm/yr), one
//! `(sin, cos)` pair per harmonic frequency in cycles per year, and one
//! Heaviside step per offset epoch with `H(0) = 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const DAYS_PER_YEAR: f64 = 365.25;

/// Relative threshold on the pivoted-QR diagonal below which a column is
/// treated as linearly dependent.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FunctionalSpec {
    /// Reference epoch in days.
    pub t0: f64,
    pub include_intercept: bool,
    pub include_trend: bool,
    /// Frequencies in cycles per year.
    pub harmonic_frequencies: Vec<f64>,
    /// Offset epochs in days.
    pub offset_epochs: Vec<f64>,
}

impl Default for FunctionalSpec {
    fn default() -> Self {
        Self {
            t0: 0.0,
            include_intercept: true,
            include_trend: true,
            harmonic_frequencies: vec![1.0, 2.0],
            offset_epochs: Vec::new(),
        }
    }
}

impl FunctionalSpec {
    pub fn linear(t0: f64) -> Self {
        Self {
            t0,
            harmonic_frequencies: Vec::new(),
            ..Self::default()
        }
    }

    pub fn with_harmonics(mut self, frequencies: &[f64]) -> Self {
        self.harmonic_frequencies = frequencies.to_vec();
        self
    }

    pub fn with_offsets(mut self, epochs: &[f64]) -> Self {
        self.offset_epochs = epochs.to_vec();
        self
    }

    pub fn n_params(&self) -> usize {
        usize::from(self.include_intercept)
            + usize::from(self.include_trend)
            + 2 * self.harmonic_frequencies.len()
            + self.offset_epochs.len()
    }

    /// `(label, unit)` for every column, in design-matrix order.
    pub fn column_labels(&self) -> Vec<(String, String)> {
        let mut out = Vec::with_capacity(self.n_params());
        if self.include_intercept {
            out.push(("a".to_string(), "mm".to_string()));
        }
        if self.include_trend {
            out.push(("b".to_string(), "mm/yr".to_string()));
        }
        for h in 1..=self.harmonic_frequencies.len() {
            out.push((format!("c{h}"), "mm".to_string()));
            out.push((format!("d{h}"), "mm".to_string()));
        }
        for k in 1..=self.offset_epochs.len() {
            out.push((format!("g{k}"), "mm".to_string()));
        }
        out
    }

    fn validate(&self, epochs: &[f64]) -> Result<()> {
        for (i, f) in self.harmonic_frequencies.iter().enumerate() {
            if !(f.is_finite() && *f > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "harmonic frequency {f} must be strictly positive"
                )));
            }
            if self.harmonic_frequencies[..i].contains(f) {
                return Err(Error::InvalidInput(format!(
                    "harmonic frequency {f} is repeated"
                )));
            }
        }
        if !self.t0.is_finite() {
            return Err(Error::InvalidInput("reference epoch must be finite".into()));
        }
        let (first, last) = match (epochs.first(), epochs.last()) {
            (Some(&f), Some(&l)) => (f, l),
            _ => return Err(Error::InvalidInput("no epochs".into())),
        };
        for &tk in &self.offset_epochs {
            if !(tk > first && tk < last) {
                return Err(Error::DegenerateOffset {
                    epoch: tk,
                    first,
                    last,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub entries: DMatrix<f64>,
    pub column_labels: Vec<String>,
    pub column_units: Vec<String>,
    pub epochs: Vec<f64>,
}

impl DesignMatrix {
    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    /// Index of the column carrying `label`.
    pub fn column(&self, label: &str) -> Option<usize> {
        self.column_labels.iter().position(|l| l == label)
    }

    /// Keep only the rows whose positions are listed in `rows`.
    pub fn select_rows(&self, rows: &[usize]) -> DesignMatrix {
        DesignMatrix {
            entries: self.entries.select_rows(rows),
            column_labels: self.column_labels.clone(),
            column_units: self.column_units.clone(),
            epochs: rows.iter().map(|&i| self.epochs[i]).collect(),
        }
    }
}

pub(crate) fn check_increasing(epochs: &[f64]) -> Result<()> {
    if let Some(w) = epochs.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(format!(
            "epochs must be strictly increasing ({} is followed by {})",
            w[0], w[1]
        )));
    }
    if epochs.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput("epochs must be finite".into()));
    }
    Ok(())
}

/// Numerical rank from a column-pivoted QR.
pub(crate) fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let r = m.clone().col_piv_qr().r();
    let diag: Vec<f64> = (0..r.nrows().min(r.ncols())).map(|i| r[(i, i)].abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    diag.iter().filter(|&&d| d > RANK_TOL * max).count()
}

pub fn build_design_matrix(epochs: &[f64], spec: &FunctionalSpec) -> Result<DesignMatrix> {
    check_increasing(epochs)?;
    spec.validate(epochs)?;
    let n = epochs.len();
    let p = spec.n_params();
    let mut a = DMatrix::<f64>::zeros(n, p);
    for (i, &t) in epochs.iter().enumerate() {
        let years = (t - spec.t0) / DAYS_PER_YEAR;
        let mut col = 0;
        if spec.include_intercept {
            a[(i, col)] = 1.0;
            col += 1;
        }
        if spec.include_trend {
            a[(i, col)] = years;
            col += 1;
        }
        for &f in &spec.harmonic_frequencies {
            let arg = 2.0 * PI * f * years;
            a[(i, col)] = arg.sin();
            a[(i, col + 1)] = arg.cos();
            col += 2;
        }
        for &tk in &spec.offset_epochs {
            a[(i, col)] = if t >= tk { 1.0 } else { 0.0 };
            col += 1;
        }
    }
    let rank = numerical_rank(&a);
    if rank < p {
        return Err(Error::RankDeficient { rank, columns: p });
    }
    let (column_labels, column_units) = spec.column_labels().into_iter().unzip();
    Ok(DesignMatrix {
        entries: a,
        column_labels,
        column_units,
        epochs: epochs.to_vec(),
    })
}

pub fn evaluate_mean(design: &DesignMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != design.ncols() {
        return Err(Error::Dimension(format!(
            "{} parameters supplied for {} design columns",
            x.len(),
            design.ncols()
        )));
    }
    let mean = &design.entries * DVector::from_column_slice(x);
    Ok(mean.iter().copied().collect())
}

/// Sine/cosine coefficients of `amplitude * sin(2π f (t - t0)/365.25 + phase)`
/// where the phase is given in days of a one-year cycle.
pub fn seasonal_coefficients(amplitude: f64, phase_days: f64) -> (f64, f64) {
    let phi = 2.0 * PI * phase_days / DAYS_PER_YEAR;
    (amplitude * phi.cos(), amplitude * phi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_ramp() {
        let a = build_design_matrix(&[0.0, 1.0, 2.0], &FunctionalSpec::linear(0.0)).unwrap();
        let expected = DMatrix::from_row_slice(
            3,
            2,
            &[1.0, 0.0, 1.0, 1.0 / 365.25, 1.0, 2.0 / 365.25],
        );
        assert_eq!(a.entries, expected);
        assert_eq!(a.column_labels, ["a", "b"]);
        assert_eq!(a.column_units[1], "mm/yr");
    }

    #[test]
    fn heaviside_step_column() {
        let spec = FunctionalSpec {
            include_intercept: false,
            include_trend: false,
            harmonic_frequencies: vec![],
            offset_epochs: vec![1.5],
            t0: 0.0,
        };
        let a = build_design_matrix(&[0.0, 1.0, 2.0], &spec).unwrap();
        assert_eq!(a.entries.column(0).as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn heaviside_at_own_epoch_is_one() {
        let spec = FunctionalSpec::linear(0.0).with_offsets(&[2.0]);
        let a = build_design_matrix(&[0.0, 1.0, 2.0, 3.0], &spec).unwrap();
        assert_eq!(a.entries.column(2).as_slice(), &[0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn quarter_period_harmonic() {
        let spec = FunctionalSpec {
            include_intercept: true,
            include_trend: false,
            harmonic_frequencies: vec![1.0],
            offset_epochs: vec![],
            t0: 0.0,
        };
        let a = build_design_matrix(&[0.0, 365.25 / 4.0, 200.0], &spec).unwrap();
        assert!((a.entries[(1, 1)] - 1.0).abs() < 1e-15);
        assert!(a.entries[(1, 2)].abs() < 1e-15);
    }

    #[test]
    fn evaluate_mean_cases() {
        let epochs: Vec<f64> = (0..=365).map(|d| d as f64).collect();
        let mut epochs = epochs;
        epochs.push(365.25);
        let a = build_design_matrix(&epochs, &FunctionalSpec::linear(0.0)).unwrap();
        assert!(evaluate_mean(&a, &[0.0, 0.0]).unwrap().iter().all(|&v| v == 0.0));
        let m = evaluate_mean(&a, &[0.0, 5.0]).unwrap();
        assert!((m.last().unwrap() - 5.0).abs() < 1e-12);
        assert!(matches!(evaluate_mean(&a, &[1.0]), Err(Error::Dimension(_))));

        let spec = FunctionalSpec {
            include_trend: false,
            harmonic_frequencies: vec![],
            ..FunctionalSpec::default()
        };
        let a = build_design_matrix(&[0.0, 3.0, 7.0], &spec).unwrap();
        assert_eq!(evaluate_mean(&a, &[4.5]).unwrap(), vec![4.5; 3]);
    }

    #[test]
    fn rejects_degenerate_offsets() {
        let epochs = [0.0, 1.0, 2.0, 3.0];
        let before = FunctionalSpec::linear(0.0).with_offsets(&[-4.0]);
        assert!(matches!(
            build_design_matrix(&epochs, &before),
            Err(Error::DegenerateOffset { .. })
        ));
        let after = FunctionalSpec::linear(0.0).with_offsets(&[10.0]);
        assert!(build_design_matrix(&epochs, &after).is_err());
        let dup = FunctionalSpec::linear(0.0).with_offsets(&[1.5, 1.5]);
        assert!(matches!(
            build_design_matrix(&epochs, &dup),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn rejects_zero_span_and_bad_harmonics() {
        assert!(matches!(
            build_design_matrix(&[5.0], &FunctionalSpec::linear(0.0)),
            Err(Error::RankDeficient { .. })
        ));
        let spec = FunctionalSpec::default().with_harmonics(&[1.0, 1.0]);
        let epochs: Vec<f64> = (0..100).map(f64::from).collect();
        assert!(build_design_matrix(&epochs, &spec).is_err());
        let spec = FunctionalSpec::default().with_harmonics(&[-1.0]);
        assert!(build_design_matrix(&epochs, &spec).is_err());
        assert!(build_design_matrix(&[0.0, 0.0, 1.0], &FunctionalSpec::linear(0.0)).is_err());
    }

    #[test]
    fn heaviside_columns_are_monotone_steps() {
        let epochs: Vec<f64> = (0..50).map(|d| (d * 3) as f64).collect();
        let spec = FunctionalSpec::default().with_offsets(&[30.5, 99.0, 120.0]);
        let a = build_design_matrix(&epochs, &spec).unwrap();
        for label in ["g1", "g2", "g3"] {
            let c = a.column(label).unwrap();
            let col = a.entries.column(c);
            assert!(col.iter().all(|&v| v == 0.0 || v == 1.0));
            assert!(col.as_slice().windows(2).all(|w| w[1] >= w[0]));
        }
        assert_eq!(spec.n_params(), a.ncols());
    }

    #[test]
    fn seasonal_convention() {
        let (c, d) = seasonal_coefficients(2.5, 0.0);
        assert_eq!((c, d), (2.5, 0.0));
        let (c, d) = seasonal_coefficients(2.0, 365.25 / 4.0);
        assert!(c.abs() < 1e-15 && (d - 2.0).abs() < 1e-15);
    }
}
