use num_complex::Complex64;

use super::{check_operator, top_k_indices, RecoveryResult};
use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::sensing::{ColumnScaling, MeasurementSet, SensingOperator};

/// Residual growth over its running minimum that counts as divergence.
const DIVERGENCE_FACTOR: f64 = 10.0;

/// Iterative hard thresholding settings.
///
/// The l0-penalized objective this iteration descends on carries a weight
/// λ; it never enters the update, where the sparsity level `k_components`
/// takes its place, so there is no field for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IhtConfig {
    /// Sparsity kept by the hard-threshold operator.
    pub k_components: usize,
    pub max_iters: usize,
    /// Stop once the residual 2-norm (raw measurement units) is below this.
    pub eps: f64,
    /// Gradient step. `None` picks `1/Na` for unit-exponential columns and
    /// `1` for unit-norm columns.
    pub step_mu: Option<f64>,
}

impl IhtConfig {
    pub fn new(k_components: usize) -> Self {
        Self {
            k_components,
            max_iters: 1000,
            eps: 1e-3,
            step_mu: None,
        }
    }

    pub fn step_for(&self, op: &SensingOperator) -> f64 {
        self.step_mu.unwrap_or(match op.scaling() {
            ColumnScaling::UnitExponential => 1.0 / op.available() as f64,
            ColumnScaling::UnitNorm => 1.0,
        })
    }

    fn validate(&self, op: &SensingOperator) -> Result<()> {
        if self.k_components == 0 || self.k_components > op.length_n() {
            return Err(Error::InvalidConfig(format!(
                "iht k = {} outside 1..={}",
                self.k_components,
                op.length_n()
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("iht max_iters must be positive".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidConfig("iht eps must be positive".into()));
        }
        let mu = self.step_for(op);
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidConfig("iht step must be positive".into()));
        }
        Ok(())
    }

    /// Evaluates the full-operator descent condition `μ·λ_max(Ω^HΩ) < 2`.
    ///
    /// For a partial DFT with unit-exponential columns `ΩΩ^H = N·I`, so the
    /// default `μ = 1/Na` gives `N/Na`, which exceeds 2 whenever fewer than
    /// half the samples are available. The iteration still converges there
    /// because only k-sparse directions matter; this report is diagnostic
    /// and the divergence guard in [`iht_recover`] is what enforces safety.
    pub fn step_condition(&self, op: &SensingOperator) -> StepCondition {
        let lambda_max = largest_gram_eigenvalue(op);
        let product = self.step_for(op) * lambda_max;
        StepCondition {
            lambda_max,
            product,
            guaranteed: product < 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCondition {
    pub lambda_max: f64,
    pub product: f64,
    pub guaranteed: bool,
}

/// Power iteration on `Ω^HΩ`.
fn largest_gram_eigenvalue(op: &SensingOperator) -> f64 {
    let n = op.length_n();
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0, (i as f64 * 0.618_034).fract()))
        .collect();
    let mut lambda = 0.0;
    for _ in 0..200 {
        let nx = norm2(&x);
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|z| *z /= nx);
        let y = op.apply(&x).expect("dimensions fixed by operator");
        let z = op.adjoint_apply(&y).expect("dimensions fixed by operator");
        let next = norm2(&z);
        x = z;
        if (next - lambda).abs() <= 1e-12 * next {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Iterative hard thresholding:
/// `f ← H_k(f + μ·Ω^H(d − Ω·f))` from `f = 0`, until the residual norm drops
/// below `eps` or `max_iters` updates have been made.
///
/// Aborts with [`Error::Diverged`] if the residual grows past ten times its
/// smallest value so far.
pub fn iht_recover(
    ms: &MeasurementSet,
    op: &SensingOperator,
    cfg: &IhtConfig,
) -> Result<RecoveryResult> {
    check_operator(ms, op)?;
    cfg.validate(op)?;
    let mu = cfg.step_for(op);
    let d = ms.values();
    let n = op.length_n();

    let mut f = vec![Complex64::new(0.0, 0.0); n];
    let mut support: Vec<usize> = Vec::new();
    let mut residual = d.to_vec();
    let mut residual_norm = norm2(&residual);
    let mut min_residual = residual_norm;
    let mut history = Vec::new();
    let mut iterations = 0;

    while residual_norm >= cfg.eps && iterations < cfg.max_iters {
        let grad = op.adjoint_apply(&residual)?;
        let step: Vec<Complex64> = f.iter().zip(&grad).map(|(fi, gi)| fi + gi * mu).collect();
        support = top_k_indices(&step, cfg.k_components);
        f.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for &i in &support {
            f[i] = step[i];
        }
        iterations += 1;

        let fit = op.apply(&f)?;
        for ((r, &di), fi) in residual.iter_mut().zip(d).zip(&fit) {
            *r = di - fi;
        }
        residual_norm = norm2(&residual);
        history.push(residual_norm);
        if !residual_norm.is_finite() || residual_norm > DIVERGENCE_FACTOR * min_residual {
            return Err(Error::Diverged {
                iteration: iterations,
                residual: residual_norm,
                min_residual,
            });
        }
        min_residual = min_residual.min(residual_norm);
    }

    let scale = op.column_scale();
    let amplitudes: Vec<Complex64> = support.iter().map(|&i| f[i] * scale).collect();
    Ok(RecoveryResult::from_coefficients(
        n,
        support,
        &amplitudes,
        iterations,
        residual_norm,
        history,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::sample_uniform;
    use crate::spectral::{generate_signal, SignalSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_tone_converges_in_one_step() {
        let spec = SignalSpec::new(8, vec![(2, c(1.0, 0.0))]).unwrap();
        let ms = sample_uniform(&generate_signal(&spec), 8, 0).unwrap();
        let op = SensingOperator::for_measurements(&ms, ColumnScaling::UnitExponential).unwrap();

        // Hand iteration: Ω^H d / 8 is exactly the unit amplitude at bin 2.
        let first = op.adjoint_apply(ms.values()).unwrap();
        assert!((first[2] / 8.0 - c(1.0, 0.0)).norm() < 1e-14);

        let cfg = IhtConfig {
            step_mu: Some(1.0 / 8.0),
            ..IhtConfig::new(1)
        };
        let res = iht_recover(&ms, &op, &cfg).unwrap();
        assert_eq!(res.iterations, 1);
        assert_eq!(res.support, vec![2]);
        assert!((res.spectrum[2] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_measurements_return_zero() {
        let ms = MeasurementSet::new(16, vec![1, 4, 9], vec![c(0.0, 0.0); 3]).unwrap();
        let op = SensingOperator::for_measurements(&ms, ColumnScaling::UnitExponential).unwrap();
        let res = iht_recover(&ms, &op, &IhtConfig::new(2)).unwrap();
        assert_eq!(res.iterations, 0);
        assert!(res.support.is_empty());
        assert_eq!(res.residual_norm, 0.0);
        assert!(res.spectrum.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn default_step_tracks_scaling() {
        let ms = MeasurementSet::new(16, vec![1, 4, 9, 10], vec![c(1.0, 0.0); 4]).unwrap();
        let exp = SensingOperator::for_measurements(&ms, ColumnScaling::UnitExponential).unwrap();
        let unit = SensingOperator::for_measurements(&ms, ColumnScaling::UnitNorm).unwrap();
        let cfg = IhtConfig::new(2);
        assert_eq!(cfg.step_for(&exp), 0.25);
        assert_eq!(cfg.step_for(&unit), 1.0);
    }

    #[test]
    fn step_condition_sees_full_gram_spectrum() {
        // ΩΩ^H = N·I for any partial DFT, so λ_max = N.
        let ms = MeasurementSet::new(32, vec![0, 3, 7, 8, 20], vec![c(1.0, 0.0); 5]).unwrap();
        let op = SensingOperator::for_measurements(&ms, ColumnScaling::UnitExponential).unwrap();
        let cond = IhtConfig::new(2).step_condition(&op);
        assert!((cond.lambda_max - 32.0).abs() < 1e-8, "{}", cond.lambda_max);
        assert!((cond.product - 32.0 / 5.0).abs() < 1e-8);
        assert!(!cond.guaranteed);
        let safe = IhtConfig {
            step_mu: Some(1.0 / 32.0),
            ..IhtConfig::new(2)
        };
        assert!(safe.step_condition(&op).guaranteed);
    }

    #[test]
    fn oversized_step_is_caught_as_divergence() {
        let spec = SignalSpec::seven_tone();
        let ms = sample_uniform(&generate_signal(&spec), 200, 1).unwrap();
        let op = SensingOperator::for_measurements(&ms, ColumnScaling::UnitExponential).unwrap();
        let cfg = IhtConfig {
            step_mu: Some(1.0),
            ..IhtConfig::new(7)
        };
        assert!(matches!(iht_recover(&ms, &op, &cfg), Err(Error::Diverged { .. })));
    }

    #[test]
    fn invalid_configs_rejected() {
        let ms = MeasurementSet::new(8, vec![0, 3], vec![c(1.0, 0.0); 2]).unwrap();
        let op = SensingOperator::for_measurements(&ms, ColumnScaling::UnitExponential).unwrap();
        for cfg in [
            IhtConfig::new(0),
            IhtConfig::new(9),
            IhtConfig { max_iters: 0, ..IhtConfig::new(1) },
            IhtConfig { eps: 0.0, ..IhtConfig::new(1) },
            IhtConfig { step_mu: Some(-1.0), ..IhtConfig::new(1) },
        ] {
            assert!(matches!(iht_recover(&ms, &op, &cfg), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn output_is_k_sparse_with_history() {
        let spec = SignalSpec::seven_tone();
        let ms = sample_uniform(&generate_signal(&spec), 200, 8).unwrap();
        let op = SensingOperator::for_measurements(&ms, ColumnScaling::UnitExponential).unwrap();
        let res = iht_recover(&ms, &op, &IhtConfig::new(7)).unwrap();
        assert!(res.support.len() <= 7);
        assert_eq!(res.residual_history.len(), res.iterations);
        assert!(res.residual_norm < 1e-3);
        let nonzero = res.spectrum.iter().filter(|z| z.norm() > 0.0).count();
        assert!(nonzero <= 7);
    }
}
