//! Projected-position construction: diagonalize `V^dagger X V`, group its
//! eigenvalues into clusters, and diagonalize the projected `Y` inside each
//! cluster.

use faer::{c64, Mat};

use super::WannierBasis;
use crate::error::{LabError, Result};
use crate::lattice::LatticeIndexing;
use crate::operator::DiagonalOperator;
use crate::spectral::{eigh_hermitian_part, position_operators, Eigh, Projector};

/// Separation of projected-`X` eigenvalues that starts a new cluster.
///
/// In a trivial insulator the eigenvalues of `PXP` bunch near the lattice
/// columns with gaps of order one, so a quarter of the lattice spacing splits
/// the bunches without splitting any of them.
pub const DEFAULT_CLUSTER_TOL: f64 = 0.25;

/// Lower bound on the tolerance tried by [`build_gwb_pxp_adaptive`].
const MIN_CLUSTER_TOL: f64 = 1e-12;

pub fn default_cluster_tol() -> f64 {
    DEFAULT_CLUSTER_TOL
}

/// Largest admissible cluster, `8N`.
fn cluster_limit(idx: &LatticeIndexing) -> usize {
    8 * idx.half_width()
}

struct ProjectedX {
    /// `V W` with `W` the eigenvectors of `V^dagger X V`.
    rotated: Mat<c64>,
    values: Vec<f64>,
}

fn project_x(p: &Projector, x: &DiagonalOperator) -> Result<ProjectedX> {
    let v = p.range_basis()?;
    let v: &Mat<c64> = &v;
    let xv = x.apply_left(v.as_ref());
    let pxp = v.adjoint() * &xv;
    let Eigh { values, vectors } = eigh_hermitian_part(pxp.as_ref())?;
    Ok(ProjectedX {
        rotated: v.as_ref() * &vectors,
        values,
    })
}

/// Ranges of consecutive eigenvalues whose neighbors differ by at most `tol`.
fn clusters(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > tol {
            if k > start {
                out.push(start..k);
            }
            start = k;
        }
    }
    out
}

fn largest(ranges: &[std::ops::Range<usize>]) -> usize {
    ranges.iter().map(|r| r.len()).max().unwrap_or(0)
}

/// Generalized Wannier basis of `range(P)` by the projected-position method.
///
/// Fails with [`LabError::DegenerateCluster`] if a cluster has more than `8N`
/// members.
pub fn build_gwb_pxp(p: &Projector, idx: &LatticeIndexing, cluster_tol: f64) -> Result<WannierBasis> {
    check_inputs(p, idx, cluster_tol)?;
    let (x, y) = position_operators(idx);
    let px = project_x(p, &x)?;
    let ranges = clusters(&px.values, cluster_tol);
    let limit = cluster_limit(idx);
    if largest(&ranges) > limit {
        return Err(LabError::DegenerateCluster {
            size: largest(&ranges),
            limit,
            tol: cluster_tol,
        });
    }
    assemble(&px, &ranges, &x, &y, idx)
}

/// As [`build_gwb_pxp`], halving `cluster_tol` until no cluster exceeds `8N`.
/// Returns the basis and the tolerance that was used.
pub fn build_gwb_pxp_adaptive(
    p: &Projector,
    idx: &LatticeIndexing,
    cluster_tol: f64,
) -> Result<(WannierBasis, f64)> {
    check_inputs(p, idx, cluster_tol)?;
    let (x, y) = position_operators(idx);
    let px = project_x(p, &x)?;
    let limit = cluster_limit(idx);
    let mut tol = cluster_tol;
    loop {
        let ranges = clusters(&px.values, tol);
        let size = largest(&ranges);
        if size <= limit {
            if tol < cluster_tol {
                log::info!("cluster_tol lowered from {cluster_tol} to {tol}");
            }
            return Ok((assemble(&px, &ranges, &x, &y, idx)?, tol));
        }
        if tol / 2.0 < MIN_CLUSTER_TOL {
            return Err(LabError::DegenerateCluster { size, limit, tol });
        }
        tol /= 2.0;
    }
}

fn check_inputs(p: &Projector, idx: &LatticeIndexing, cluster_tol: f64) -> Result<()> {
    if p.dim() != idx.total_dim() {
        return Err(LabError::DimensionMismatch(format!(
            "projector has dimension {}, lattice has {}",
            p.dim(),
            idx.total_dim()
        )));
    }
    if !(cluster_tol > 0.0 && cluster_tol.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "cluster_tol must be positive, got {cluster_tol}"
        )));
    }
    Ok(())
}

fn assemble(
    px: &ProjectedX,
    ranges: &[std::ops::Range<usize>],
    x: &DiagonalOperator,
    y: &DiagonalOperator,
    idx: &LatticeIndexing,
) -> Result<WannierBasis> {
    let dim = px.rotated.nrows();
    let rank = px.rotated.ncols();
    let mut functions = Mat::<c64>::zeros(dim, rank);
    let mut centers = Vec::with_capacity(rank);
    for range in ranges {
        let z = px.rotated.subcols(range.start, range.len());
        let yz = y.apply_left(z);
        let pyp = z.adjoint() * &yz;
        let e = eigh_hermitian_part(pyp.as_ref())?;
        let psi = z * &e.vectors;
        for k in 0..psi.ncols() {
            let col = range.start + k;
            let phase = gauge_phase(psi.col(k).iter());
            for i in 0..dim {
                functions[(i, col)] = psi[(i, k)] * phase;
            }
            centers.push(expectations(&functions, col, x, y));
        }
    }
    WannierBasis::from_parts(functions, centers, *idx)
}

/// Unit phase making the entry of largest modulus real and positive (first
/// such entry on ties), which fixes the gauge of each function.
fn gauge_phase<'a>(col: impl Iterator<Item = &'a c64>) -> c64 {
    let mut best = c64::new(1.0, 0.0);
    let mut best_norm = 0.0;
    for z in col {
        let n = z.norm();
        if n > best_norm * (1.0 + 1e-12) {
            best_norm = n;
            best = *z;
        }
    }
    if best_norm == 0.0 {
        c64::new(1.0, 0.0)
    } else {
        (best / best_norm).conj()
    }
}

fn expectations(f: &Mat<c64>, col: usize, x: &DiagonalOperator, y: &DiagonalOperator) -> [f64; 2] {
    let mut mx = 0.0;
    let mut my = 0.0;
    for i in 0..f.nrows() {
        let w = f[(i, col)].norm_sqr();
        mx += w * x.diagonal()[i];
        my += w * y.diagonal()[i];
    }
    [mx, my]
}
