//! Dense complex matrices and Householder-QR least squares.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// `A·x`.
    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        // Sparse iterates (hard-thresholded vectors) touch only a few columns.
        let nonzero: Vec<usize> = (0..x.len()).filter(|&i| x[i] != ZERO).collect();
        if 2 * nonzero.len() < self.cols {
            return Ok((0..self.rows)
                .map(|r| {
                    let row = self.row(r);
                    nonzero.iter().map(|&i| row[i] * x[i]).sum()
                })
                .collect());
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `A^H·y`.
    pub fn adjoint_mul_vec(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: y.len(),
            });
        }
        let mut out = vec![ZERO; self.cols];
        for (r, &yr) in y.iter().enumerate() {
            if yr == ZERO {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * yr;
            }
        }
        Ok(out)
    }
}

/// Solution of `min ‖A·x − b‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub solution: Vec<Complex64>,
    pub residual_norm: f64,
}

/// Least squares for a tall (or square) full-column-rank system via
/// Householder QR. A column whose `|R_jj|` falls below
/// `max(rows, cols)·ε·max|R_ii|` is treated as rank deficiency.
///
/// `column_labels` only feeds the error report on rank deficiency.
pub fn least_squares(a: &CMatrix, b: &[Complex64], column_labels: &[usize]) -> Result<LeastSquares> {
    let (m, n) = (a.rows, a.cols);
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: b.len(),
        });
    }
    if n > m {
        return Err(Error::Underdetermined {
            unknowns: n,
            equations: m,
        });
    }
    if n == 0 {
        return Ok(LeastSquares {
            solution: Vec::new(),
            residual_norm: norm2(b),
        });
    }

    // Column-major working copy; Householder reflectors are applied in place.
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    let mut rhs = b.to_vec();
    let mut diag = vec![ZERO; n];

    for j in 0..n {
        let x = &cols[j][j..];
        let xnorm = norm2(x);
        if xnorm == 0.0 {
            diag[j] = ZERO;
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let mut v: Vec<Complex64> = x.to_vec();
        v[0] -= alpha;
        let vnorm = norm2(&v);
        if vnorm == 0.0 {
            diag[j] = alpha;
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vnorm);

        for col in cols.iter_mut().skip(j) {
            reflect(&v, &mut col[j..]);
        }
        reflect(&v, &mut rhs[j..]);
        diag[j] = cols[j][j];
    }

    let max_diag = diag.iter().map(|d| d.norm()).fold(0.0, f64::max);
    let tol = m.max(n) as f64 * f64::EPSILON * max_diag;
    if max_diag == 0.0 || diag.iter().any(|d| d.norm() <= tol) {
        return Err(Error::Singular {
            support: column_labels.to_vec(),
        });
    }

    // Back substitution on R (upper triangle of the reflected columns).
    let mut x = vec![ZERO; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for k in (i + 1)..n {
            acc -= cols[k][i] * x[k];
        }
        x[i] = acc / cols[i][i];
    }

    Ok(LeastSquares {
        solution: x,
        residual_norm: norm2(&rhs[n..]),
    })
}

/// `y ← (I − 2vv^H)·y` for unit `v`.
fn reflect(v: &[Complex64], y: &mut [Complex64]) {
    let dot: Complex64 = v.iter().zip(y.iter()).map(|(vi, yi)| vi.conj() * yi).sum();
    let s = dot * 2.0;
    for (yi, vi) in y.iter_mut().zip(v) {
        *yi -= vi * s;
    }
}

pub fn norm2(x: &[Complex64]) -> f64 {
    // Scaled accumulation avoids overflow for the divergent iterates IHT can
    // produce before its guard trips.
    let scale = x.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let sum: f64 = x.iter().map(|z| (z / scale).norm_sqr()).sum();
    scale * sum.sqrt()
}
