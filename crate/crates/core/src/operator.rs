//! Dense Hermitian operators and real diagonal operators.
//!
//! Position operators and window masks are diagonal in the site basis, so they
//! are kept as [`DiagonalOperator`] and applied in `O(n^2)` instead of being
//! multiplied as dense matrices.

use faer::{c64, Mat, MatRef};

use crate::error::{LabError, Result};

/// Relative tolerance of the Hermiticity invariant.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// `max |A - A^dagger|` over all entries.
pub fn hermiticity_residual(a: MatRef<'_, c64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// `max |A_ij|`
pub fn max_abs(a: MatRef<'_, c64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max(a[(i, j)].norm());
        }
    }
    worst
}

/// `(A + A^dagger) / 2`
pub fn hermitian_part(a: MatRef<'_, c64>) -> Mat<c64> {
    let n = a.nrows();
    Mat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Dense complex square matrix satisfying
/// `|A - A^dagger|_max <= 1e-12 * max(1, |A|_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: Mat<c64>,
}

impl HermitianOperator {
    pub fn new(mat: Mat<c64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(LabError::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let residual = hermiticity_residual(mat.as_ref());
        let allowed = HERMITICITY_TOL * max_abs(mat.as_ref()).max(1.0);
        if !(residual <= allowed) {
            return Err(LabError::NonHermitian { residual, allowed });
        }
        Ok(HermitianOperator { mat })
    }

    /// Symmetrizes `mat` before wrapping it; for products that are Hermitian in
    /// exact arithmetic.
    pub fn from_hermitian_part(mat: MatRef<'_, c64>) -> Self {
        HermitianOperator {
            mat: hermitian_part(mat),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        HermitianOperator {
            mat: Mat::from_fn(n, n, |i, j| {
                if i == j {
                    c64::new(diag[i], 0.0)
                } else {
                    c64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.mat
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(self.mat.as_ref())
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }
}

/// Real diagonal operator in the site basis (positions, window and strip masks).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    diag: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(diag: Vec<f64>) -> Self {
        DiagonalOperator { diag }
    }

    /// 0/1 mask from a predicate over linear indices.
    pub fn mask(dim: usize, keep: impl Fn(usize) -> bool) -> Self {
        DiagonalOperator {
            diag: (0..dim).map(|i| if keep(i) { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// `max |d_i|`, the spectral norm.
    pub fn norm(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    pub fn product(&self, other: &DiagonalOperator) -> DiagonalOperator {
        assert_eq!(self.dim(), other.dim());
        DiagonalOperator {
            diag: self.diag.iter().zip(&other.diag).map(|(a, b)| a * b).collect(),
        }
    }

    /// `1 - D`
    pub fn complement(&self) -> DiagonalOperator {
        DiagonalOperator {
            diag: self.diag.iter().map(|d| 1.0 - d).collect(),
        }
    }

    /// Indices with nonzero diagonal.
    pub fn support(&self) -> Vec<usize> {
        self.diag
            .iter()
            .enumerate()
            .filter(|(_, d)| **d != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn to_dense(&self) -> HermitianOperator {
        HermitianOperator::from_diagonal(&self.diag)
    }

    /// `D A`
    pub fn apply_left(&self, a: MatRef<'_, c64>) -> Mat<c64> {
        assert_eq!(a.nrows(), self.dim());
        Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * self.diag[i])
    }

    /// `A D`
    pub fn apply_right(&self, a: MatRef<'_, c64>) -> Mat<c64> {
        assert_eq!(a.ncols(), self.dim());
        Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * self.diag[j])
    }

    /// `[D, A] = D A - A D`, entrywise `(d_i - d_j) A_ij`.
    pub fn commutator(&self, a: MatRef<'_, c64>) -> Mat<c64> {
        assert_eq!(a.nrows(), self.dim());
        assert_eq!(a.ncols(), self.dim());
        Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
            a[(i, j)] * (self.diag[i] - self.diag[j])
        })
    }
}

/// Frobenius inner product `<A, B> = tr(A^dagger B)`.
pub fn frobenius_inner(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> c64 {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    let mut acc = c64::new(0.0, 0.0);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)].conj() * b[(i, j)];
        }
    }
    acc
}

/// Squared Frobenius norm of the rows selected by `weights` (0/1 or general
/// nonnegative weights).
pub fn weighted_row_norm_sqr(a: MatRef<'_, c64>, weights: &[f64]) -> f64 {
    assert_eq!(a.nrows(), weights.len());
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for (i, w) in weights.iter().enumerate() {
            if *w != 0.0 {
                acc += w * a[(i, j)].norm_sqr();
            }
        }
    }
    acc
}

/// Rows `rows` of `a`, in order.
pub fn select_rows(a: MatRef<'_, c64>, rows: &[usize]) -> Mat<c64> {
    Mat::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)])
}

/// Columns `cols` of `a`, in order.
pub fn select_cols(a: MatRef<'_, c64>, cols: &[usize]) -> Mat<c64> {
    Mat::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}
