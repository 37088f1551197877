use num_complex::Complex64;

use super::{check_operator, RecoveryResult};
use crate::error::{Error, Result};
use crate::linalg::{least_squares, norm2};
use crate::sensing::{MeasurementSet, SensingOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmpConfig {
    /// Iteration budget, normally the number of signal components K.
    pub k_components: usize,
    /// Stop early once the residual 2-norm drops to this value. Zero disables
    /// the check.
    pub residual_tol: f64,
}

impl OmpConfig {
    pub fn new(k_components: usize) -> Self {
        Self {
            k_components,
            residual_tol: 0.0,
        }
    }
}

/// Orthogonal matching pursuit.
///
/// Starting from `r = d` and an empty support, each iteration adds the
/// unselected column with the largest `|⟨r, Ω_i⟩|` (lowest index on ties),
/// re-solves least squares of `d` on all selected columns and sets
/// `r = d − Ω_S·f_S`. Runs `k_components` iterations unless the residual
/// tolerance is reached first.
pub fn omp_recover(
    ms: &MeasurementSet,
    op: &SensingOperator,
    cfg: &OmpConfig,
) -> Result<RecoveryResult> {
    check_operator(ms, op)?;
    if cfg.k_components == 0 {
        return Err(Error::InvalidConfig("omp k must be positive".into()));
    }
    if cfg.k_components > ms.available() {
        return Err(Error::InvalidConfig(format!(
            "omp k = {} exceeds the {} available samples",
            cfg.k_components,
            ms.available()
        )));
    }
    if !(cfg.residual_tol >= 0.0) {
        return Err(Error::InvalidConfig("omp residual tolerance must be nonnegative".into()));
    }

    let d = ms.values();
    let n = op.length_n();
    let mut residual = d.to_vec();
    let mut selected = vec![false; n];
    let mut support: Vec<usize> = Vec::with_capacity(cfg.k_components);
    let mut coefficients: Vec<Complex64> = Vec::new();
    let mut history = Vec::with_capacity(cfg.k_components);
    let mut residual_norm = norm2(&residual);

    while support.len() < cfg.k_components {
        if cfg.residual_tol > 0.0 && residual_norm <= cfg.residual_tol {
            break;
        }
        let correlation = op.adjoint_apply(&residual)?;
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in correlation.iter().enumerate() {
            if selected[i] {
                continue;
            }
            let mag = c.norm_sqr();
            if best.is_none_or(|(_, b)| mag > b) {
                best = Some((i, mag));
            }
        }
        let Some((pick, _)) = best else { break };
        selected[pick] = true;
        let pos = support.binary_search(&pick).unwrap_err();
        support.insert(pos, pick);

        let a = op.restrict_columns(&support)?;
        let ls = least_squares(&a, d, &support)?;
        let fit = a.mul_vec(&ls.solution)?;
        for ((r, &di), fi) in residual.iter_mut().zip(d).zip(&fit) {
            *r = di - fi;
        }
        residual_norm = norm2(&residual);
        history.push(residual_norm);
        coefficients = ls.solution;
    }

    let scale = op.column_scale();
    let amplitudes: Vec<Complex64> = coefficients.iter().map(|c| c * scale).collect();
    let iterations = history.len();
    Ok(RecoveryResult::from_coefficients(
        n,
        support,
        &amplitudes,
        iterations,
        residual_norm,
        history,
    ))
}
