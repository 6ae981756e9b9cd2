//! Eigendecomposition, Fermi projectors, position operators and lattice masks.

mod decay;
mod norms;
pub mod random;

use std::borrow::Cow;

use faer::{c64, Mat, MatRef, Side};

pub use decay::{ball_mask, ball_weight, bulk_gap, kernel_decay_fit, DecayFit, DECAY_FLOOR};
pub(crate) use decay::least_squares_line;
pub use norms::{schatten_norm, singular_values, spectral_norm, Schatten};

use crate::error::{LabError, Result};
use crate::lattice::LatticeIndexing;
use crate::operator::{hermitian_part, hermiticity_residual, DiagonalOperator, HermitianOperator};

/// Minimum distance between the Fermi level and any eigenvalue.
pub const FERMI_GAP_TOL: f64 = 1e-8;

/// Tolerances of the projector invariants.
pub const IDEMPOTENCY_TOL: f64 = 1e-10;
pub const PROJECTOR_HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-8;

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub vectors: Mat<c64>,
}

impl Eigh {
    /// `max_k |H v_k - lambda_k v_k|` and `|V^dagger V - I|_max`.
    pub fn residuals(&self, h: MatRef<'_, c64>) -> (f64, f64) {
        let hv = h * &self.vectors;
        let n = self.vectors.ncols();
        let mut worst = 0.0f64;
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..self.vectors.nrows() {
                acc += (hv[(i, k)] - self.vectors[(i, k)] * self.values[k]).norm_sqr();
            }
            worst = worst.max(acc.sqrt());
        }
        let gram = self.vectors.adjoint() * &self.vectors;
        let mut ortho = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((gram[(i, j)] - c64::new(target, 0.0)).norm());
            }
        }
        (worst, ortho)
    }
}

/// Eigendecomposition of a Hermitian operator.
pub fn eigh(h: &HermitianOperator) -> Result<Eigh> {
    eigh_unchecked(h.as_mat())
}

/// Eigendecomposition of a raw matrix after checking the Hermiticity invariant.
pub fn eigh_matrix(a: MatRef<'_, c64>) -> Result<Eigh> {
    if a.nrows() != a.ncols() {
        return Err(LabError::DimensionMismatch("eigh needs a square matrix".into()));
    }
    let residual = hermiticity_residual(a);
    let allowed = crate::operator::HERMITICITY_TOL * crate::operator::max_abs(a).max(1.0);
    if !(residual <= allowed) {
        return Err(LabError::NonHermitian { residual, allowed });
    }
    eigh_unchecked(a)
}

/// Eigendecomposition of the Hermitian part of `a`; for projected operators
/// such as `V^dagger X V` that are Hermitian only up to roundoff.
pub(crate) fn eigh_hermitian_part(a: MatRef<'_, c64>) -> Result<Eigh> {
    eigh_unchecked(hermitian_part(a).as_ref())
}

fn eigh_unchecked(a: MatRef<'_, c64>) -> Result<Eigh> {
    if a.nrows() == 0 {
        return Ok(Eigh {
            values: Vec::new(),
            vectors: Mat::zeros(0, 0),
        });
    }
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| LabError::NoConvergence)?;
    let values: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(LabError::NoConvergence);
    }
    Ok(Eigh {
        values,
        vectors: evd.U().to_owned(),
    })
}

/// Orthogonal projector with its rank and, when known, an orthonormal frame of
/// its range.
#[derive(Debug, Clone)]
pub struct Projector {
    matrix: HermitianOperator,
    rank: usize,
    frame: Option<Mat<c64>>,
}

/// Measured violations of the projector invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorCheck {
    /// `|P^2 - P|_F`, an upper bound on the spectral norm.
    pub idempotency: f64,
    pub hermiticity: f64,
    /// `|tr P - rank|`
    pub trace_error: f64,
}

impl ProjectorCheck {
    pub fn passes(&self) -> bool {
        self.idempotency <= IDEMPOTENCY_TOL
            && self.hermiticity <= PROJECTOR_HERMITICITY_TOL
            && self.trace_error <= TRACE_TOL
    }
}

impl Projector {
    /// `V V^dagger` for orthonormal columns `V`.
    pub fn from_frame(frame: Mat<c64>) -> Self {
        let dense = &frame * frame.adjoint();
        Projector {
            matrix: HermitianOperator::from_hermitian_part(dense.as_ref()),
            rank: frame.ncols(),
            frame: Some(frame),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Projector::from_frame(Mat::zeros(dim, 0))
    }

    /// Wraps a dense matrix claimed to be a rank-`rank` projector. Use
    /// [`Projector::check`] to verify the claim.
    pub fn from_dense(matrix: HermitianOperator, rank: usize) -> Self {
        Projector {
            matrix,
            rank,
            frame: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &HermitianOperator {
        &self.matrix
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.matrix.as_mat()
    }

    pub fn frame(&self) -> Option<MatRef<'_, c64>> {
        self.frame.as_ref().map(|f| f.as_ref())
    }

    /// Orthonormal basis of the range; diagonalizes the matrix when no frame
    /// is stored.
    pub fn range_basis(&self) -> Result<Cow<'_, Mat<c64>>> {
        if let Some(f) = &self.frame {
            return Ok(Cow::Borrowed(f));
        }
        let e = eigh(&self.matrix)?;
        let n = self.dim();
        let start = n - self.rank;
        Ok(Cow::Owned(e.vectors.subcols(start, self.rank).to_owned()))
    }

    /// `self - sub` for a subprojector `sub` (`sub self = sub`).
    pub fn difference(&self, sub: &Projector) -> Result<Projector> {
        if sub.dim() != self.dim() || sub.rank > self.rank {
            return Err(LabError::DimensionMismatch(format!(
                "cannot subtract rank-{} projector (dim {}) from rank-{} projector (dim {})",
                sub.rank,
                sub.dim(),
                self.rank,
                self.dim()
            )));
        }
        let diff = self.as_mat() - sub.as_mat();
        Ok(Projector {
            matrix: HermitianOperator::from_hermitian_part(diff.as_ref()),
            rank: self.rank - sub.rank,
            frame: None,
        })
    }

    pub fn check(&self) -> ProjectorCheck {
        let p = self.as_mat();
        let p2 = p * p;
        let idempotency = (&p2 - p).norm_l2();
        let trace = self.matrix.trace();
        ProjectorCheck {
            idempotency,
            hermiticity: self.matrix.hermiticity_residual(),
            trace_error: (trace - c64::new(self.rank as f64, 0.0)).norm(),
        }
    }
}

/// Eigendecomposition of `H` together with its Fermi projector.
#[derive(Debug, Clone)]
pub struct FermiState {
    pub eigen: Eigh,
    pub fermi_level: f64,
    pub projector: Projector,
}

/// `P = sum_{lambda_k < E_F} v_k v_k^dagger`.
pub fn fermi_projection(h: &HermitianOperator, fermi_level: f64) -> Result<FermiState> {
    let eigen = eigh(h)?;
    if let Some((eigenvalue, distance)) = eigen
        .values
        .iter()
        .map(|v| (*v, (v - fermi_level).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
    {
        if !(distance > FERMI_GAP_TOL) {
            return Err(LabError::EigenvalueAtFermiLevel {
                eigenvalue,
                fermi_level,
                distance,
            });
        }
    }
    let rank = eigen.values.iter().filter(|v| **v < fermi_level).count();
    let frame = eigen.vectors.subcols(0, rank).to_owned();
    Ok(FermiState {
        projector: Projector::from_frame(frame),
        eigen,
        fermi_level,
    })
}

pub fn fermi_projector(h: &HermitianOperator, fermi_level: f64) -> Result<Projector> {
    fermi_projection(h, fermi_level).map(|s| s.projector)
}

/// Diagonal position operators `X = m1`, `Y = m2`, repeated across orbitals.
pub fn position_operators(idx: &LatticeIndexing) -> (DiagonalOperator, DiagonalOperator) {
    let (x, y) = idx.coordinates();
    (DiagonalOperator::new(x), DiagonalOperator::new(y))
}

/// Indicator of `[-L, L)^2`.
pub fn box_mask(idx: &LatticeIndexing, l: usize) -> Result<DiagonalOperator> {
    if l > idx.half_width() {
        return Err(LabError::WindowTooLarge {
            l,
            limit: idx.half_width(),
            n: idx.half_width(),
        });
    }
    Ok(box_mask_unchecked(idx, l))
}

pub(crate) fn box_mask_unchecked(idx: &LatticeIndexing, l: usize) -> DiagonalOperator {
    let l = l as i64;
    DiagonalOperator::mask(idx.total_dim(), |i| {
        let s = idx.site(i);
        (-l..l).contains(&s.x) && (-l..l).contains(&s.y)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

/// Indicator of `|m_axis - center| <= width`.
pub fn strip_mask(idx: &LatticeIndexing, axis: Axis, center: i64, width: f64) -> DiagonalOperator {
    DiagonalOperator::mask(idx.total_dim(), |i| {
        let s = idx.site(i);
        let coord = match axis {
            Axis::X => s.x,
            Axis::Y => s.y,
        };
        ((coord - center) as f64).abs() <= width
    })
}
