//! Single iteration reconstruction.
//!
//! The DFT of the zero-filled available samples carries each component at
//! `Na·A_k` on top of a noise-like floor caused by the missing samples. For
//! uniformly random missing positions that floor has variance
//! `(N − Na)·Na/(N − 1)·ΣA_i²` at every bin, which sets a detection
//! threshold. Bins above the threshold form the support and their amplitudes
//! are solved by least squares on the available samples.

use num_complex::Complex64;

use super::RecoveryResult;
use crate::error::{Error, Result};
use crate::linalg::{least_squares, norm2};
use crate::sensing::{partial_columns, ColumnScaling, MeasurementSet};
use crate::spectral::{forward_in_place, Spectrum, SpectrumScale};

/// Relative round-off level of the transform. Bins below
/// `ROUNDOFF_FACTOR·ε·√N·‖v‖₂` are never detected, which matters when the
/// statistical threshold collapses to zero (no missing samples).
const ROUNDOFF_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdForm {
    /// `T = sqrt(−var·ln(1 − P^{1/N}))`: all N noise-only bins stay below T
    /// with probability P when their magnitudes are Rayleigh distributed.
    #[default]
    Literature,
    /// `T = (1/N)·sqrt(−var²·log10(1 − sqrt(P)))`, kept verbatim for
    /// comparison. Far too low in practice.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EnergyMode {
    /// `ΣA_i²` estimated as the mean power of the available samples.
    #[default]
    EstimateFromSamples,
    /// `ΣA_i²` supplied by the caller.
    KnownAmplitudes(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiraConfig {
    /// Probability that every noise-only bin falls below the threshold.
    pub p_detect: f64,
    pub threshold_form: ThresholdForm,
    pub energy_mode: EnergyMode,
}

impl Default for SiraConfig {
    fn default() -> Self {
        Self {
            p_detect: 0.99,
            threshold_form: ThresholdForm::default(),
            energy_mode: EnergyMode::default(),
        }
    }
}

impl SiraConfig {
    fn validate(&self) -> Result<()> {
        if !(self.p_detect > 0.0 && self.p_detect < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "sira detection probability {} outside (0, 1)",
                self.p_detect
            )));
        }
        if let EnergyMode::KnownAmplitudes(e) = self.energy_mode {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::InvalidConfig(format!("known energy {e} must be nonnegative")));
            }
        }
        Ok(())
    }
}

/// `V[f] = Σ_a v(a)·e^{−j2π·f·P_v(a)/N}`, the DFT of the available samples
/// with the missing ones set to zero.
pub fn initial_dft(ms: &MeasurementSet) -> Spectrum {
    let mut buf = vec![Complex64::new(0.0, 0.0); ms.length_n()];
    for (&p, &v) in ms.positions().iter().zip(ms.values()) {
        buf[p] = v;
    }
    forward_in_place(&mut buf).expect("measurement sets are nonempty");
    Spectrum::new(buf, SpectrumScale::Raw).expect("measurement sets are nonempty")
}

/// The `ΣA_i²` term of the missing-sample variance model.
pub fn sira_signal_energy(ms: &MeasurementSet, cfg: &SiraConfig) -> f64 {
    match cfg.energy_mode {
        EnergyMode::KnownAmplitudes(e) => e,
        EnergyMode::EstimateFromSamples => {
            ms.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / ms.available() as f64
        }
    }
}

/// Variance of an off-support bin of the initial DFT:
/// `(N − Na)·Na/(N − 1)·energy`.
///
/// # Panics
/// If `na` is not in `1..=n`.
pub fn sira_variance(n: usize, na: usize, energy: f64) -> f64 {
    assert!(na >= 1 && na <= n, "available count {na} outside 1..={n}");
    if n == 1 {
        return 0.0;
    }
    let missing = (n - na) as f64;
    missing * na as f64 / (n - 1) as f64 * energy
}

pub fn sira_threshold(var: f64, n: usize, p_detect: f64, form: ThresholdForm) -> f64 {
    if var <= 0.0 {
        return 0.0;
    }
    match form {
        ThresholdForm::Literature => {
            // 1 − P^{1/N} without cancellation.
            let tail = -(p_detect.ln() / n as f64).exp_m1();
            (-var * tail.ln()).sqrt()
        }
        ThresholdForm::Printed => {
            (-var * var * (1.0 - p_detect.sqrt()).log10()).sqrt() / n as f64
        }
    }
}

/// Bins with `|V[k]| > t`, ascending.
pub fn detect_support(v: &Spectrum, t: f64) -> Vec<usize> {
    v.bins()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > t)
        .map(|(k, _)| k)
        .collect()
}

/// Threshold the initial DFT once, then solve the detected amplitudes by
/// least squares. All other bins are zero.
pub fn sira_recover(ms: &MeasurementSet, cfg: &SiraConfig) -> Result<RecoveryResult> {
    cfg.validate()?;
    let n = ms.length_n();
    let na = ms.available();
    let v = initial_dft(ms);
    let energy = sira_signal_energy(ms, cfg);
    let var = sira_variance(n, na, energy);
    let floor = ROUNDOFF_FACTOR * f64::EPSILON * (n as f64).sqrt() * norm2(ms.values());
    let threshold = sira_threshold(var, n, cfg.p_detect, cfg.threshold_form).max(floor);
    let support = detect_support(&v, threshold);
    if support.is_empty() {
        return Err(Error::EmptySupport { threshold });
    }
    if support.len() > na {
        return Err(Error::Underdetermined {
            unknowns: support.len(),
            equations: na,
        });
    }
    let a_cs = partial_columns(ms.positions(), n, &support, ColumnScaling::UnitExponential)?;
    let ls = least_squares(&a_cs, ms.values(), &support)?;
    let residual = ls.residual_norm;
    Ok(RecoveryResult::from_coefficients(
        n,
        support,
        &ls.solution,
        1,
        residual,
        vec![residual],
    ))
}
