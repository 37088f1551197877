//! Sparse reconstruction algorithms and their shared pieces.

mod iht;
mod omp;
mod sira;

pub use iht::{iht_recover, IhtConfig, StepCondition};
pub use omp::{omp_recover, OmpConfig};
pub use sira::{
    detect_support, initial_dft, sira_recover, sira_signal_energy, sira_threshold, sira_variance,
    EnergyMode, SiraConfig, ThresholdForm,
};

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{least_squares, CMatrix};
use crate::sensing::{partial_columns, ColumnScaling, MeasurementSet, SensingOperator};

/// Outcome of a reconstruction. `spectrum` is on amplitude scale: entry `k`
/// estimates `A_k` and is zero outside `support`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub spectrum: Vec<Complex64>,
    pub support: Vec<usize>,
    pub iterations: usize,
    pub residual_norm: f64,
    /// Residual 2-norm after each iteration (one entry per iteration).
    pub residual_history: Vec<f64>,
}

impl RecoveryResult {
    pub(crate) fn from_coefficients(
        length_n: usize,
        support: Vec<usize>,
        coefficients: &[Complex64],
        iterations: usize,
        residual_norm: f64,
        residual_history: Vec<f64>,
    ) -> Self {
        let mut spectrum = vec![Complex64::new(0.0, 0.0); length_n];
        for (&k, &c) in support.iter().zip(coefficients) {
            spectrum[k] = c;
        }
        Self {
            spectrum,
            support,
            iterations,
            residual_norm,
            residual_history,
        }
    }
}

/// Keeps the `k` largest-magnitude entries of `x` and zeroes the rest. Equal
/// magnitudes are ranked by lower index first.
pub fn hard_threshold(x: &[Complex64], k: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
    for i in top_k_indices(x, k) {
        out[i] = x[i];
    }
    out
}

/// Indices of the `k` largest-magnitude entries (ties to the lower index),
/// ascending. Zero entries are never selected.
pub(crate) fn top_k_indices(x: &[Complex64], k: usize) -> Vec<usize> {
    let mut idx: Vec<(f64, usize)> = x
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm_sqr() > 0.0)
        .map(|(i, z)| (z.norm_sqr(), i))
        .collect();
    if k == 0 {
        return Vec::new();
    }
    if idx.len() > k {
        let by_rank = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
        };
        idx.select_nth_unstable_by(k - 1, by_rank);
        idx.truncate(k);
    }
    let mut out: Vec<usize> = idx.into_iter().map(|(_, i)| i).collect();
    out.sort_unstable();
    out
}

/// Least-squares amplitudes `X = argmin ‖A_CS·X − v‖₂`, i.e.
/// `(A_CS^H A_CS)^{-1} A_CS^H v`, computed through a QR factorization.
pub fn solve_amplitudes(a_cs: &CMatrix, v: &[Complex64]) -> Result<Vec<Complex64>> {
    let labels: Vec<usize> = (0..a_cs.cols()).collect();
    Ok(least_squares(a_cs, v, &labels)?.solution)
}

/// Amplitudes obtained by least squares on the ground-truth support. Used as
/// the reference in support-correct error checks.
pub fn oracle_solve(ms: &MeasurementSet, true_support: &[usize]) -> Result<Vec<Complex64>> {
    if true_support.len() > ms.available() {
        return Err(Error::Underdetermined {
            unknowns: true_support.len(),
            equations: ms.available(),
        });
    }
    let a = partial_columns(
        ms.positions(),
        ms.length_n(),
        true_support,
        ColumnScaling::UnitExponential,
    )?;
    let mut sorted = true_support.to_vec();
    sorted.sort_unstable();
    Ok(least_squares(&a, ms.values(), &sorted)?.solution)
}

pub(crate) fn check_operator(ms: &MeasurementSet, op: &SensingOperator) -> Result<()> {
    if op.length_n() != ms.length_n() || op.positions() != ms.positions() {
        return Err(Error::OperatorMismatch);
    }
    Ok(())
}
