//! Generalized Wannier bases: construction, moments, density, lattice labels
//! and truncated projectors.

mod density;
mod io;
mod moments;
mod pxp;

use std::collections::BTreeMap;

use faer::{c64, ColRef, Mat, MatRef};

pub use density::bounded_density;
pub use moments::{localization_profile, moment, write_moment_csv, MomentEntry, MomentReport};
pub use pxp::{build_gwb_pxp, build_gwb_pxp_adaptive, default_cluster_tol, DEFAULT_CLUSTER_TOL};

use crate::error::{LabError, Result};
use crate::lattice::{LatticeIndexing, Site};
use crate::operator::select_cols;
use crate::spectral::Projector;

/// Lattice label `(m, j)` of a relabeled basis function; `slot` is the
/// 0-based `j` within the unit square around `site`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeLabel {
    pub site: Site,
    pub slot: usize,
}

/// Orthonormal columns with center points and optional lattice labels.
///
/// After [`WannierBasis::relabel_to_lattice`] every unit square of the box
/// holds `degeneracy` slots. Slots without a function stand for zero columns;
/// they are listed by [`WannierBasis::padding_labels`] but not stored.
#[derive(Debug, Clone)]
pub struct WannierBasis {
    functions: Mat<c64>,
    centers: Vec<[f64; 2]>,
    labels: Option<Vec<LatticeLabel>>,
    degeneracy: usize,
    lattice: LatticeIndexing,
}

impl WannierBasis {
    /// Wraps columns and centers without checking orthonormality; see
    /// [`WannierBasis::gram_residual`].
    pub fn from_parts(
        functions: Mat<c64>,
        centers: Vec<[f64; 2]>,
        lattice: LatticeIndexing,
    ) -> Result<Self> {
        if functions.nrows() != lattice.total_dim() {
            return Err(LabError::DimensionMismatch(format!(
                "basis has {} rows, lattice dimension is {}",
                functions.nrows(),
                lattice.total_dim()
            )));
        }
        if centers.len() != functions.ncols() {
            return Err(LabError::DimensionMismatch(format!(
                "{} centers for {} functions",
                centers.len(),
                functions.ncols()
            )));
        }
        if centers.iter().flatten().any(|c| !c.is_finite()) {
            return Err(LabError::InvalidParameter("non-finite center".into()));
        }
        Ok(WannierBasis {
            functions,
            centers,
            labels: None,
            degeneracy: 1,
            lattice,
        })
    }

    pub fn len(&self) -> usize {
        self.functions.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.functions.nrows()
    }

    pub fn lattice(&self) -> &LatticeIndexing {
        &self.lattice
    }

    pub fn functions(&self) -> MatRef<'_, c64> {
        self.functions.as_ref()
    }

    pub fn function(&self, k: usize) -> ColRef<'_, c64> {
        self.functions.col(k)
    }

    pub fn centers(&self) -> &[[f64; 2]] {
        &self.centers
    }

    pub fn labels(&self) -> Option<&[LatticeLabel]> {
        self.labels.as_deref()
    }

    /// Common number of slots per unit square, `M`.
    pub fn degeneracy(&self) -> usize {
        self.degeneracy
    }

    pub fn is_relabeled(&self) -> bool {
        self.labels.is_some()
    }

    /// `max |Psi^dagger Psi - I|`
    pub fn gram_residual(&self) -> f64 {
        let gram = self.functions.adjoint() * &self.functions;
        let n = self.len();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - c64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// `|P - Psi Psi^dagger|_F`, an upper bound on the spectral residual.
    pub fn span_residual(&self, p: &Projector) -> f64 {
        let span = &self.functions * self.functions.adjoint();
        (p.as_mat() - &span).norm_l2()
    }

    /// Assigns each function to the unit square `[m - 1/2, m + 1/2)^2`
    /// containing its center; the degeneracy becomes the largest occupation.
    pub fn relabel_to_lattice(mut self) -> Self {
        let mut occupation: BTreeMap<Site, usize> = BTreeMap::new();
        let labels = self
            .centers
            .iter()
            .map(|c| {
                let site = Site::containing(*c);
                let count = occupation.entry(site).or_insert(0);
                let label = LatticeLabel { site, slot: *count };
                *count += 1;
                label
            })
            .collect();
        self.degeneracy = occupation.values().copied().max().unwrap_or(1).max(1);
        self.labels = Some(labels);
        self
    }

    /// Labels of the zero columns padding every square of the box to
    /// `degeneracy` slots.
    pub fn padding_labels(&self) -> Result<Vec<LatticeLabel>> {
        let labels = self.labels.as_ref().ok_or(LabError::NotRelabeled)?;
        let mut occupation: BTreeMap<Site, usize> = BTreeMap::new();
        for l in labels {
            *occupation.entry(l.site).or_insert(0) += 1;
        }
        let mut pad = Vec::new();
        for site in self.lattice.sites() {
            let used = occupation.get(&site).copied().unwrap_or(0);
            for slot in used..self.degeneracy {
                pad.push(LatticeLabel { site, slot });
            }
        }
        Ok(pad)
    }

    /// Indices of the functions labeled with `|m|_inf <= l`.
    pub fn indices_within(&self, l: usize) -> Result<Vec<usize>> {
        let labels = self.labels.as_ref().ok_or(LabError::NotRelabeled)?;
        Ok(labels
            .iter()
            .enumerate()
            .filter(|(_, lab)| lab.site.sup_norm() <= l as i64)
            .map(|(k, _)| k)
            .collect())
    }

    /// Columns labeled with `|m|_inf <= l`, an orthonormal frame of `P_L`.
    pub fn truncated_frame(&self, l: usize) -> Result<Mat<c64>> {
        let keep = self.indices_within(l)?;
        Ok(select_cols(self.functions.as_ref(), &keep))
    }

    /// `P_L = sum_{|m|_inf <= L} psi_m psi_m^dagger`.
    pub fn truncated_projector(&self, l: usize) -> Result<Projector> {
        Ok(Projector::from_frame(self.truncated_frame(l)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;
    use crate::spectral::fermi_projector;

    fn deltas(idx: LatticeIndexing, points: &[([f64; 2], usize)]) -> WannierBasis {
        let n = points.len();
        let mut f = Mat::zeros(idx.total_dim(), n);
        for (k, (_, row)) in points.iter().enumerate() {
            f[(*row, k)] = c64::new(1.0, 0.0);
        }
        WannierBasis::from_parts(f, points.iter().map(|p| p.0).collect(), idx).unwrap()
    }

    #[test]
    fn integer_centers_relabel_identically() {
        let idx = LatticeIndexing::new(2, 1);
        let pts: Vec<_> = idx.sites().enumerate().map(|(k, s)| (s.as_point(), k)).collect();
        let b = deltas(idx, &pts).relabel_to_lattice();
        assert_eq!(b.degeneracy(), 1);
        for (lab, c) in b.labels().unwrap().iter().zip(b.centers()) {
            assert_eq!(lab.site.as_point(), *c);
            assert_eq!(lab.slot, 0);
        }
        assert!(b.padding_labels().unwrap().is_empty());
    }

    #[test]
    fn shared_square_forces_padding() {
        let idx = LatticeIndexing::new(1, 2);
        let pts = [
            ([0.1, 0.2], 0),
            ([-0.2, 0.3], 1),
            ([-1.0, -1.0], 2),
            ([-1.0, 0.0], 4),
            ([0.0, -1.0], 6),
        ];
        let b = deltas(idx, &pts).relabel_to_lattice();
        assert_eq!(b.degeneracy(), 2);
        let labels = b.labels().unwrap();
        assert_eq!(labels[0], LatticeLabel { site: Site::new(0, 0), slot: 0 });
        assert_eq!(labels[1], LatticeLabel { site: Site::new(0, 0), slot: 1 });
        let pad = b.padding_labels().unwrap();
        assert_eq!(pad.len(), 3);
        assert!(pad.iter().all(|l| l.slot == 1 && l.site != Site::new(0, 0)));
    }

    #[test]
    fn half_open_squares() {
        let eps = 1e-9;
        assert_eq!(Site::containing([0.5 - eps, 0.5 - eps]), Site::new(0, 0));
        assert_eq!(Site::containing([0.5, 0.5]), Site::new(1, 1));
        assert_eq!(Site::containing([-0.5, -0.5]), Site::new(0, 0));
    }

    #[test]
    fn labels_are_within_half_a_square() {
        let idx = LatticeIndexing::new(3, 1);
        let pts: Vec<_> = (0..20)
            .map(|k| ([k as f64 * 0.29 - 2.9, 2.4 - k as f64 * 0.23], k))
            .collect();
        let b = deltas(idx, &pts).relabel_to_lattice();
        for (lab, c) in b.labels().unwrap().iter().zip(b.centers()) {
            assert!((c[0] - lab.site.x as f64).abs() <= 0.5 + 1e-12);
            assert!((c[1] - lab.site.y as f64).abs() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn truncation_requires_labels() {
        let idx = LatticeIndexing::new(1, 1);
        let b = deltas(idx, &[([0.0, 0.0], 3)]);
        assert!(matches!(b.truncated_projector(1), Err(LabError::NotRelabeled)));
    }

    #[test]
    fn atomic_truncation_counts_sites() {
        let spec = ModelSpec::atomic(4, 2.0, 0.0, 0);
        let idx = spec.lattice();
        let p = fermi_projector(&spec.build().unwrap(), 0.0).unwrap();
        let b = build_gwb_pxp(&p, &idx, DEFAULT_CLUSTER_TOL).unwrap().relabel_to_lattice();
        // sites of [-4, 3]^2 with |m|_inf <= L
        for l in 0..=5usize {
            let expected = idx.sites().filter(|s| s.sup_norm() <= l as i64).count();
            let pl = b.truncated_projector(l).unwrap();
            assert_eq!(pl.rank(), expected);
            assert!(pl.check().passes());
        }
        assert_eq!(b.truncated_projector(1).unwrap().rank(), 9);
        let full = b.truncated_projector(4).unwrap();
        assert!((full.as_mat() - p.as_mat()).norm_l2() < 1e-10);
    }
}
