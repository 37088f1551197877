//! Seeded Monte-Carlo experiment harness.
//!
//! A trial is one `(algorithm, M, seed)` cell: the signal is synthesized, M
//! positions are drawn with the seed (identically for every algorithm), the
//! recovery call is timed and the result is scored against the true
//! spectrum. Sweeps run the Cartesian product of algorithms, measurement
//! counts and seeds; summaries aggregate over seeds.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::recovery::{
    iht_recover, omp_recover, sira_recover, IhtConfig, OmpConfig, RecoveryResult, SiraConfig,
};
use crate::sensing::{sample_uniform, ColumnScaling, MeasurementSet, SensingOperator};
use crate::spectral::{generate_signal, SignalSpec, TimeSignal};

/// Ordering is alphabetical by name, which is the row order of every CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Iht,
    Omp,
    Sira,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Iht, Algorithm::Omp, Algorithm::Sira];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Iht => "iht",
            Algorithm::Omp => "omp",
            Algorithm::Sira => "sira",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "iht" => Ok(Algorithm::Iht),
            "omp" => Ok(Algorithm::Omp),
            "sira" => Ok(Algorithm::Sira),
            other => Err(Error::InvalidArgument(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmConfigs {
    pub omp: OmpConfig,
    pub iht: IhtConfig,
    pub sira: SiraConfig,
    /// Column scaling of the operator handed to OMP and IHT.
    pub scaling: ColumnScaling,
}

impl AlgorithmConfigs {
    /// OMP and IHT told the true sparsity `k`, everything else default.
    pub fn with_sparsity(k: usize) -> Self {
        Self {
            omp: OmpConfig::new(k),
            iht: IhtConfig::new(k),
            sira: SiraConfig::default(),
            scaling: ColumnScaling::UnitExponential,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub spec: SignalSpec,
    pub m_values: Vec<usize>,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    pub configs: AlgorithmConfigs,
    /// Error at or below which a trial counts as a success in summaries.
    pub success_tol: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.spec.length_n();
        if self.m_values.is_empty() {
            return Err(Error::InvalidConfig("m_values must not be empty".into()));
        }
        if let Some(&m) = self.m_values.iter().find(|&&m| m == 0 || m > n) {
            return Err(Error::InvalidConfig(format!("m = {m} outside 1..={n}")));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds must not be empty".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("algorithms must not be empty".into()));
        }
        if !(self.success_tol >= 0.0) {
            return Err(Error::InvalidConfig("success tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub algorithm: Algorithm,
    pub m: usize,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    /// Max spectral error on amplitude scale. For failed trials this is the
    /// error of an all-zero reconstruction, so the value stays finite.
    pub error: f64,
    pub elapsed_seconds: f64,
    pub support_exact: bool,
    pub iterations: usize,
    pub failure: Option<Error>,
}

impl ExperimentRecord {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    pub fn succeeded(&self, tolerance: f64) -> bool {
        !self.failed() && self.error <= tolerance
    }

    fn sort_key(&self) -> (Algorithm, usize, u64) {
        (self.algorithm, self.m, self.seed)
    }
}

/// `max_k |p_true[k] − spectrum[k]|` over all N bins, amplitude scale.
pub fn max_spectral_error(spec: &SignalSpec, result: &RecoveryResult) -> Result<f64> {
    spectrum_error(spec, &result.spectrum)
}

fn spectrum_error(spec: &SignalSpec, spectrum: &[num_complex::Complex64]) -> Result<f64> {
    if spectrum.len() != spec.length_n() {
        return Err(Error::DimensionMismatch {
            expected: spec.length_n(),
            found: spectrum.len(),
        });
    }
    let truth = spec.amplitude_vector();
    Ok(truth
        .iter()
        .zip(spectrum)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// A trial's record together with the reconstruction, when there was one.
#[derive(Debug, Clone)]
pub struct Trial {
    pub record: ExperimentRecord,
    pub measurements: MeasurementSet,
    pub result: Option<RecoveryResult>,
}

/// Runs one recovery and times only the recovery call. OMP and IHT receive a
/// prebuilt dense operator, so its construction is outside the timed region.
pub fn recover_timed(
    algorithm: Algorithm,
    ms: &MeasurementSet,
    configs: &AlgorithmConfigs,
) -> (Result<RecoveryResult>, f64) {
    let op = match algorithm {
        Algorithm::Sira => None,
        Algorithm::Omp | Algorithm::Iht => {
            match SensingOperator::for_measurements(ms, configs.scaling) {
                Ok(op) => Some(op),
                Err(e) => return (Err(e), 0.0),
            }
        }
    };
    let start = Instant::now();
    let result = match (algorithm, &op) {
        (Algorithm::Sira, _) => sira_recover(ms, &configs.sira),
        (Algorithm::Omp, Some(op)) => omp_recover(ms, op, &configs.omp),
        (Algorithm::Iht, Some(op)) => iht_recover(ms, op, &configs.iht),
        (_, None) => unreachable!("operator built above for omp and iht"),
    };
    (result, start.elapsed().as_secs_f64())
}

fn trial_on_signal(
    spec: &SignalSpec,
    signal: &TimeSignal,
    algorithm: Algorithm,
    m: usize,
    seed: u64,
    configs: &AlgorithmConfigs,
) -> Result<Trial> {
    let ms = sample_uniform(signal, m, seed)?;
    let (outcome, elapsed_seconds) = recover_timed(algorithm, &ms, configs);
    let bins = spec.bins();
    let (error, support_exact, iterations, failure, result) = match outcome {
        Ok(res) => {
            let error = max_spectral_error(spec, &res)?;
            let exact = res.support == bins;
            (error, exact, res.iterations, None, Some(res))
        }
        Err(e) => {
            let zero = vec![num_complex::Complex64::new(0.0, 0.0); spec.length_n()];
            (spectrum_error(spec, &zero)?, false, 0, Some(e), None)
        }
    };
    Ok(Trial {
        record: ExperimentRecord {
            algorithm,
            m,
            seed,
            n: spec.length_n(),
            k: spec.sparsity(),
            error,
            elapsed_seconds,
            support_exact,
            iterations,
            failure,
        },
        measurements: ms,
        result,
    })
}

/// Like [`run_trial`] but keeps the measurements and reconstruction.
pub fn run_trial_detailed(
    spec: &SignalSpec,
    algorithm: Algorithm,
    m: usize,
    seed: u64,
    configs: &AlgorithmConfigs,
) -> Result<Trial> {
    let signal = generate_signal(spec);
    trial_on_signal(spec, &signal, algorithm, m, seed, configs)
}

/// One `(algorithm, M, seed)` trial. Recovery errors are recorded in the
/// returned record; only an invalid `m` is an `Err`.
pub fn run_trial(
    spec: &SignalSpec,
    algorithm: Algorithm,
    m: usize,
    seed: u64,
    configs: &AlgorithmConfigs,
) -> Result<ExperimentRecord> {
    Ok(run_trial_detailed(spec, algorithm, m, seed, configs)?.record)
}

fn run_cells(
    spec: &SignalSpec,
    cells: Vec<(Algorithm, usize, u64)>,
    configs: &AlgorithmConfigs,
    jobs: usize,
) -> Result<Vec<ExperimentRecord>> {
    let signal = generate_signal(spec);
    let one = |&(alg, m, seed): &(Algorithm, usize, u64)| {
        trial_on_signal(spec, &signal, alg, m, seed, configs).map(|t| t.record)
    };
    let mut records = if jobs <= 1 {
        cells.iter().map(one).collect::<Result<Vec<_>>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| cells.par_iter().map(one).collect::<Result<Vec<_>>>())?
    };
    records.sort_by_key(ExperimentRecord::sort_key);
    Ok(records)
}

/// Every algorithm × M × seed, sorted by `(algorithm, m, seed)`. `jobs > 1`
/// runs trials on that many threads; timings are cleanest with `jobs = 1`.
pub fn run_sweep(config: &ExperimentConfig, jobs: usize) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let mut cells = Vec::new();
    for &alg in &config.algorithms {
        for &m in &config.m_values {
            for &seed in &config.seeds {
                cells.push((alg, m, seed));
            }
        }
    }
    run_cells(&config.spec, cells, &config.configs, jobs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub algorithm: Algorithm,
    pub m: usize,
    pub error_median: f64,
    pub error_q1: f64,
    pub error_q3: f64,
    pub time_median: f64,
    pub success_rate: f64,
    pub support_exact_rate: f64,
    pub trials: usize,
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn sorted_values(it: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = it.collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Per `(algorithm, m)` medians, quartiles and rates over seeds.
pub fn summarize(records: &[ExperimentRecord], success_tol: f64) -> Vec<CellSummary> {
    let mut groups: BTreeMap<(Algorithm, usize), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.algorithm, r.m)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((algorithm, m), rs)| {
            let errors = sorted_values(rs.iter().map(|r| r.error));
            let times = sorted_values(rs.iter().map(|r| r.elapsed_seconds));
            let trials = rs.len();
            let count = |f: &dyn Fn(&ExperimentRecord) -> bool| {
                rs.iter().filter(|r| f(r)).count() as f64 / trials as f64
            };
            CellSummary {
                algorithm,
                m,
                error_median: quantile(&errors, 0.5),
                error_q1: quantile(&errors, 0.25),
                error_q3: quantile(&errors, 0.75),
                time_median: quantile(&times, 0.5),
                success_rate: count(&|r| r.succeeded(success_tol)),
                support_exact_rate: count(&|r| r.support_exact),
                trials,
            }
        })
        .collect()
}

/// A trial succeeds when its error is at most `tolerance`; an M qualifies
/// when at least `min_fraction` of the seeds succeed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessCriterion {
    pub tolerance: f64,
    pub min_fraction: f64,
}

impl Default for SuccessCriterion {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            min_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub m: usize,
    pub success_rate: f64,
    pub error_median: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinMeasurementSearch {
    pub found: Option<usize>,
    /// Every M evaluated, ascending.
    pub curve: Vec<CurvePoint>,
}

fn curve_point(
    spec: &SignalSpec,
    algorithm: Algorithm,
    configs: &AlgorithmConfigs,
    criterion: SuccessCriterion,
    seeds: &[u64],
    m: usize,
    jobs: usize,
) -> Result<CurvePoint> {
    let cells = seeds.iter().map(|&s| (algorithm, m, s)).collect();
    let records = run_cells(spec, cells, configs, jobs)?;
    let summary = summarize(&records, criterion.tolerance);
    let cell = &summary[0];
    Ok(CurvePoint {
        m,
        success_rate: cell.success_rate,
        error_median: cell.error_median,
    })
}

fn checked_range(spec: &SignalSpec, m_range: &[usize], seeds: &[u64]) -> Result<Vec<usize>> {
    if m_range.is_empty() {
        return Err(Error::InvalidArgument("empty measurement range".into()));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("no seeds".into()));
    }
    let n = spec.length_n();
    if let Some(&m) = m_range.iter().find(|&&m| m == 0 || m > n) {
        return Err(Error::InvalidArgument(format!("m = {m} outside 1..={n}")));
    }
    let mut ms = m_range.to_vec();
    ms.sort_unstable();
    ms.dedup();
    Ok(ms)
}

/// Smallest M in `m_range` whose success fraction meets the criterion,
/// scanning upward. Success need not be monotone in M for fixed seeds, so
/// there is no bisection; the scan stops at the first qualifying M.
pub fn find_min_measurements(
    spec: &SignalSpec,
    algorithm: Algorithm,
    configs: &AlgorithmConfigs,
    criterion: SuccessCriterion,
    seeds: &[u64],
    m_range: &[usize],
    jobs: usize,
) -> Result<MinMeasurementSearch> {
    let ms = checked_range(spec, m_range, seeds)?;
    let mut curve = Vec::new();
    for m in ms {
        let point = curve_point(spec, algorithm, configs, criterion, seeds, m, jobs)?;
        let hit = point.success_rate >= criterion.min_fraction;
        curve.push(point);
        if hit {
            return Ok(MinMeasurementSearch {
                found: Some(m),
                curve,
            });
        }
    }
    Ok(MinMeasurementSearch { found: None, curve })
}

/// Success rate and median error at every M in `m_range`.
pub fn success_curve(
    spec: &SignalSpec,
    algorithm: Algorithm,
    configs: &AlgorithmConfigs,
    criterion: SuccessCriterion,
    seeds: &[u64],
    m_range: &[usize],
    jobs: usize,
) -> Result<Vec<CurvePoint>> {
    checked_range(spec, m_range, seeds)?
        .into_iter()
        .map(|m| curve_point(spec, algorithm, configs, criterion, seeds, m, jobs))
        .collect()
}
