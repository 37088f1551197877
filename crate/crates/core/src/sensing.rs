//! Random sample selection and the partial inverse-DFT sensing operator.
//!
//! Row `a` of the operator evaluates every frequency bin at the time
//! position `positions[a]`: `Ω[a, k] = e^{+j2π·k·positions[a]/N}`. Applied
//! to an amplitude-scale sparse spectrum it reproduces the measured samples
//! exactly. Adjoint products use the conjugate transpose.

use std::io::{Read, Write};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::spectral::{unit_roots, TimeSignal};

/// Available sample positions and their values.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    length_n: usize,
    positions: Vec<usize>,
    values: Vec<Complex64>,
}

impl MeasurementSet {
    pub fn new(length_n: usize, positions: Vec<usize>, values: Vec<Complex64>) -> Result<Self> {
        validate_positions(&positions, length_n)?;
        if values.len() != positions.len() {
            return Err(Error::InvalidMeasurements(format!(
                "{} positions but {} values",
                positions.len(),
                values.len()
            )));
        }
        Ok(Self {
            length_n,
            positions,
            values,
        })
    }

    pub fn length_n(&self) -> usize {
        self.length_n
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Number of available samples, Na.
    pub fn available(&self) -> usize {
        self.positions.len()
    }

    /// Number of missing samples, N − Na.
    pub fn missing(&self) -> usize {
        self.length_n - self.positions.len()
    }

    /// Writes `position,re,im` rows, positions ascending.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
        w.write_record(["position", "re", "im"]).map_err(io)?;
        for (p, v) in self.positions.iter().zip(&self.values) {
            w.write_record([p.to_string(), format!("{:e}", v.re), format!("{:e}", v.im)])
                .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
        Ok(())
    }

    /// Reads the format produced by [`MeasurementSet::write_csv`]. The signal
    /// length is not stored in the file and must be supplied.
    pub fn read_csv<R: Read>(reader: R, length_n: usize) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r
            .headers()
            .map_err(|e| Error::InvalidMeasurements(e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["position", "re", "im"] {
            return Err(Error::InvalidMeasurements(format!(
                "expected header position,re,im, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut positions = Vec::new();
        let mut values = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::InvalidMeasurements(e.to_string()))?;
            let bad = |what: &str| {
                Error::InvalidMeasurements(format!("row {}: bad {what}", line + 2))
            };
            if rec.len() != 3 {
                return Err(bad("column count"));
            }
            positions.push(rec[0].trim().parse::<usize>().map_err(|_| bad("position"))?);
            let re = rec[1].trim().parse::<f64>().map_err(|_| bad("re"))?;
            let im = rec[2].trim().parse::<f64>().map_err(|_| bad("im"))?;
            values.push(Complex64::new(re, im));
        }
        Self::new(length_n, positions, values)
    }
}

fn validate_positions(positions: &[usize], length_n: usize) -> Result<()> {
    if length_n == 0 {
        return Err(Error::InvalidMeasurements("length must be positive".into()));
    }
    if positions.is_empty() {
        return Err(Error::InvalidMeasurements("at least one sample required".into()));
    }
    if positions.len() > length_n {
        return Err(Error::InvalidMeasurements(format!(
            "{} samples exceed length {length_n}",
            positions.len()
        )));
    }
    if let Some(&p) = positions.iter().find(|&&p| p >= length_n) {
        return Err(Error::InvalidMeasurements(format!(
            "position {p} out of range for length {length_n}"
        )));
    }
    if positions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidMeasurements(
            "positions must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Picks `m_samples` distinct positions uniformly at random (without
/// replacement) from the signal, fully determined by `seed`.
pub fn sample_uniform(signal: &TimeSignal, m_samples: usize, seed: u64) -> Result<MeasurementSet> {
    let n = signal.length_n();
    if m_samples == 0 || m_samples > n {
        return Err(Error::InvalidArgument(format!(
            "sample count {m_samples} outside 1..={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = rand::seq::index::sample(&mut rng, n, m_samples).into_vec();
    positions.sort_unstable();
    let values = positions.iter().map(|&p| signal.samples()[p]).collect();
    Ok(MeasurementSet {
        length_n: n,
        positions,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnScaling {
    /// Entries are the bare unit-modulus exponentials.
    #[default]
    UnitExponential,
    /// Each column divided by √Na, giving unit Euclidean column norms.
    UnitNorm,
}

impl ColumnScaling {
    /// Factor applied to every entry for `na` rows.
    pub fn factor(self, na: usize) -> f64 {
        match self {
            ColumnScaling::UnitExponential => 1.0,
            ColumnScaling::UnitNorm => 1.0 / (na as f64).sqrt(),
        }
    }
}

/// Dense Na×N partial inverse-DFT operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingOperator {
    length_n: usize,
    positions: Vec<usize>,
    scaling: ColumnScaling,
    matrix: CMatrix,
}

impl SensingOperator {
    pub fn new(positions: &[usize], length_n: usize, scaling: ColumnScaling) -> Result<Self> {
        let all: Vec<usize> = (0..length_n).collect();
        let matrix = partial_columns(positions, length_n, &all, scaling)?;
        Ok(Self {
            length_n,
            positions: positions.to_vec(),
            scaling,
            matrix,
        })
    }

    pub fn for_measurements(ms: &MeasurementSet, scaling: ColumnScaling) -> Result<Self> {
        Self::new(ms.positions(), ms.length_n(), scaling)
    }

    pub fn length_n(&self) -> usize {
        self.length_n
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn scaling(&self) -> ColumnScaling {
        self.scaling
    }

    /// Number of rows, Na.
    pub fn available(&self) -> usize {
        self.positions.len()
    }

    /// Multiplier that converts a coefficient solved against this operator
    /// back to amplitude scale (the column scaling factor).
    pub fn column_scale(&self) -> f64 {
        self.scaling.factor(self.positions.len())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix.get(row, col)
    }

    /// `Ω·x` for a length-N coefficient vector.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.matrix.mul_vec(x)
    }

    /// `Ω^H·y` for a length-Na vector.
    pub fn adjoint_apply(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        self.matrix.adjoint_mul_vec(y)
    }

    /// Columns at `support`, in ascending bin order.
    pub fn restrict_columns(&self, support: &[usize]) -> Result<CMatrix> {
        let support = sorted_support(support, self.length_n)?;
        Ok(CMatrix::from_fn(self.available(), support.len(), |r, c| {
            self.matrix.get(r, support[c])
        }))
    }
}

/// Builds only the requested columns of the operator for `positions`, without
/// materializing the full Na×N matrix. Identical entries to
/// `SensingOperator::new(..).restrict_columns(support)`.
pub fn partial_columns(
    positions: &[usize],
    length_n: usize,
    support: &[usize],
    scaling: ColumnScaling,
) -> Result<CMatrix> {
    validate_positions(positions, length_n)?;
    let support = sorted_support(support, length_n)?;
    let roots = unit_roots(length_n);
    let factor = scaling.factor(positions.len());
    let n = length_n as u128;
    Ok(CMatrix::from_fn(positions.len(), support.len(), |r, c| {
        let phase = (support[c] as u128 * positions[r] as u128) % n;
        roots[phase as usize] * factor
    }))
}

fn sorted_support(support: &[usize], length_n: usize) -> Result<Vec<usize>> {
    let mut s = support.to_vec();
    s.sort_unstable();
    if let Some(&bad) = s.iter().find(|&&k| k >= length_n) {
        return Err(Error::InvalidArgument(format!(
            "support index {bad} out of range for length {length_n}"
        )));
    }
    if s.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("support indices must be distinct".into()));
    }
    Ok(s)
}
