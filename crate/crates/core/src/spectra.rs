//! Dense complex matrices, a cyclic complex Jacobi eigensolver for Hermitian
//! matrices, and singular spectra obtained from normal matrices `T*T`.

use num_complex::Complex64;
use thiserror::Error;

/// Largest order accepted by [`jacobi_eigen`].
pub const MAX_ORDER: usize = 4096;
pub const MAX_SWEEPS: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error(
        "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})"
    )]
    NotConverged { sweeps: usize, residual: f64 },
    #[error("eigenvalue {value:e} is below the tolerance -{tol:e}")]
    NegativeEigenvalue { value: f64, tol: f64 },
    #[error("matrix of order {0} exceeds the supported maximum {MAX_ORDER}")]
    TooLarge(usize),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
}

pub type Result<T> = std::result::Result<T, SpectraError>;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(SpectraError::InvalidMatrix(format!(
                "expected {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `Σ_i |a_ij|²` for column `j`.
    pub fn column_norm_sqr(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, j).norm_sqr()).sum()
    }

    /// `selfᴴ · self`.
    pub fn gram(&self) -> ComplexMatrix {
        let n = self.cols;
        let mut out = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            for k in j..n {
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..self.rows {
                    s += self.get(i, j).conj() * self.get(i, k);
                }
                out.set(j, k, s);
                out.set(k, j, s.conj());
            }
        }
        out
    }
}

/// A Hermitian matrix, symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    order: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Builds `(A + Aᴴ)/2` from a row-major square matrix.
    pub fn new(order: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != order * order {
            return Err(SpectraError::InvalidMatrix(format!(
                "expected {} entries for order {order}, got {}",
                order * order,
                entries.len()
            )));
        }
        if entries
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(SpectraError::InvalidMatrix("non-finite entry".into()));
        }
        let mut data = entries;
        for i in 0..order {
            let d = data[i * order + i].re;
            data[i * order + i] = Complex64::new(d, 0.0);
            for j in (i + 1)..order {
                let avg = 0.5 * (data[i * order + j] + data[j * order + i].conj());
                data[i * order + j] = avg;
                data[j * order + i] = avg.conj();
            }
        }
        Ok(Self { order, data })
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(SpectraError::InvalidMatrix("matrix is not square".into()));
        }
        Self::new(m.rows(), m.data().to_vec())
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, v) in values.iter().enumerate() {
            data[i * n + i] = Complex64::new(*v, 0.0);
        }
        Self { order: n, data }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.order + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i).re).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn off_diagonal_norm(&self) -> f64 {
        let n = self.order;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += self.data[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.order {
            out.data[i * self.order + i] += c;
        }
        out
    }
}

/// Diagnostics of a Jacobi run.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiOutcome {
    /// Eigenvalues, nonincreasing.
    pub values: Vec<f64>,
    pub sweeps: usize,
    /// Off-diagonal Frobenius norm at exit.
    pub residual: f64,
    /// Trace after each sweep.
    pub trace_history: Vec<f64>,
    /// Frobenius norm after each sweep.
    pub frobenius_history: Vec<f64>,
}

/// Eigenvalues of a Hermitian matrix, nonincreasing.
///
/// Cyclic-by-row Jacobi with complex rotations: each pivot `a_pq = |a_pq|
/// e^{iφ}` is first made real by the phase `diag(1, e^{-iφ})` and then
/// annihilated by a real plane rotation. Stops when the off-diagonal
/// Frobenius norm is below `tol · ‖A‖_F`.
pub fn jacobi_eigen(mat: &HermitianMatrix, tol: f64) -> Result<Vec<f64>> {
    jacobi_eigen_detailed(mat, tol).map(|o| o.values)
}

pub fn jacobi_eigen_detailed(mat: &HermitianMatrix, tol: f64) -> Result<JacobiOutcome> {
    let n = mat.order();
    if n > MAX_ORDER {
        return Err(SpectraError::TooLarge(n));
    }
    let mut a = mat.data.clone();
    let scale = mat.frobenius();
    let threshold = tol * scale;
    let mut trace_history = Vec::new();
    let mut frobenius_history = Vec::new();
    let snapshot = |a: &[Complex64]| HermitianMatrix {
        order: n,
        data: a.to_vec(),
    };

    let mut off = mat.off_diagonal_norm();
    let mut sweeps = 0;
    while off > threshold && scale > 0.0 {
        if sweeps == MAX_SWEEPS {
            return Err(SpectraError::NotConverged {
                sweeps,
                residual: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, n, p, q);
            }
        }
        sweeps += 1;
        let h = snapshot(&a);
        off = h.off_diagonal_norm();
        trace_history.push(h.trace());
        frobenius_history.push(h.frobenius());
    }

    let mut values: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(JacobiOutcome {
        values,
        sweeps,
        residual: off,
        trace_history,
        frobenius_history,
    })
}

fn rotate(a: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    // skip pivots already negligible against the diagonal
    if g <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[p * n + q] = Complex64::new(0.0, 0.0);
        a[q * n + p] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / g; // e^{iφ}
    let theta = (aqq - app) / (2.0 * g);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] in the (p, q) plane; A <- Uᴴ A U
    let ph_c = phase.conj();
    for k in 0..n {
        let x = a[k * n + p];
        let y = a[k * n + q];
        a[k * n + p] = x * c - y * ph_c * s;
        a[k * n + q] = x * s + y * ph_c * c;
    }
    for k in 0..n {
        let x = a[p * n + k];
        let y = a[q * n + k];
        a[p * n + k] = x * c - y * phase * s;
        a[q * n + k] = x * s + y * phase * c;
    }
    a[p * n + p] = Complex64::new(app - t * g, 0.0);
    a[q * n + q] = Complex64::new(aqq + t * g, 0.0);
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);
}

/// Maps values in `(-tol, 0)` to 0; anything at or below `-tol` is an error.
pub fn psd_clip(values: &[f64], tol: f64) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|&v| {
            if v >= 0.0 {
                Ok(v)
            } else if v > -tol {
                Ok(0.0)
            } else {
                Err(SpectraError::NegativeEigenvalue { value: v, tol })
            }
        })
        .collect()
}

/// Truncation metadata carried by a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TruncationMeta {
    /// Highest domain monomial degree.
    pub n: usize,
    /// Highest projection monomial degree.
    pub m: usize,
    pub tol: f64,
}

/// Singular values, nonincreasing and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
    mode_indexed: Option<Vec<f64>>,
    pub meta: TruncationMeta,
}

impl SingularSpectrum {
    /// Sorts `values` nonincreasing. Negative or non-finite input is rejected.
    pub fn from_values(values: Vec<f64>, meta: TruncationMeta) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(SpectraError::InvalidMatrix(
                "singular values must be finite and nonnegative".into(),
            ));
        }
        let mut sorted = values;
        sorted.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            values: sorted,
            mode_indexed: None,
            meta,
        })
    }

    /// Keeps the per-mode ordering alongside the sorted one.
    pub fn from_modes(modes: Vec<f64>, meta: TruncationMeta) -> Result<Self> {
        let mut s = Self::from_values(modes.clone(), meta)?;
        s.mode_indexed = Some(modes);
        Ok(s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode_indexed(&self) -> Option<&[f64]> {
        self.mode_indexed.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ_{j<K} s_j^p` over the sorted values; `K` is clamped to the length.
    pub fn schatten_partial(&self, p: f64, k: usize) -> f64 {
        self.values
            .iter()
            .take(k)
            .filter(|s| **s > 0.0)
            .map(|s| s.powf(p))
            .sum()
    }

    /// `(Σ s_j²)^{1/2}`.
    pub fn hilbert_schmidt(&self) -> f64 {
        self.values.iter().map(|s| s * s).sum::<f64>().sqrt()
    }
}

/// `s_j = √λ_j(mat)` after clipping eigenvalues in `(-tol, 0)`.
pub fn singular_values_from_normal(
    mat: &HermitianMatrix,
    tol: f64,
    meta: TruncationMeta,
) -> Result<SingularSpectrum> {
    let eig = jacobi_eigen(mat, 1e-15)?;
    let clipped = psd_clip(&eig, tol)?;
    SingularSpectrum::from_values(clipped.into_iter().map(f64::sqrt).collect(), meta)
}
