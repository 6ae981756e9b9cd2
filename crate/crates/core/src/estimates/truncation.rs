//! Distance between the windowed projector and the truncated projector.

use faer::{c64, Mat, MatRef};
use serde::Serialize;

use super::ScalingSeries;
use crate::chern::check_interior_window;
use crate::error::Result;
use crate::operator::DiagonalOperator;
use crate::spectral::{box_mask, Projector};
use crate::wannier::WannierBasis;

/// `ceil(L^{1/(3+2 delta)})`, kept in `[1, L-1]` when `L >= 2`.
pub fn approx_window_width(l: usize, delta: f64) -> usize {
    let raw = (l as f64).powf(1.0 / (3.0 + 2.0 * delta)).ceil() as usize;
    raw.min(l.saturating_sub(1)).max(1)
}

/// The split
///
/// ```text
/// |chi P - P_L|^2 = |chi (P - P_L)|^2 + |(1 - chi) P_L|^2
/// |chi P - P_L| <= |chi (P - P_{L+l})| + |chi (P_{L+l} - P_L)|
///                + |(1 - chi)(P_L - P_{L-l})| + |(1 - chi) P_{L-l}|
/// ```
///
/// with all norms Hilbert-Schmidt and `chi = chi_L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourTermSplit {
    pub l: usize,
    pub ell: usize,
    pub total: f64,
    pub inner: f64,
    pub outer: f64,
    pub terms: [f64; 4],
}

impl FourTermSplit {
    /// `|total^2 - inner^2 - outer^2|`
    pub fn pythagorean_residual(&self) -> f64 {
        (self.total.powi(2) - self.inner.powi(2) - self.outer.powi(2)).abs()
    }

    /// `sum(terms) - total`, nonnegative when the triangle inequality holds.
    pub fn triangle_slack(&self) -> f64 {
        self.terms.iter().sum::<f64>() - self.total
    }
}

fn outer_product(v: MatRef<'_, c64>) -> Mat<c64> {
    v * v.adjoint()
}

/// Hilbert-Schmidt norm of the rows of `m` where `mask` is (`inside`) or is
/// not (`!inside`) set.
fn masked_norm(mask: &DiagonalOperator, inside: bool, m: MatRef<'_, c64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for (i, d) in mask.diagonal().iter().enumerate() {
            if (*d != 0.0) == inside {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// `|chi_L P - P_L|_{S2}` against `L`, with the split above at every `L`.
pub fn prop_approx_series(
    p: &Projector,
    basis: &WannierBasis,
    l_values: &[usize],
    delta: f64,
) -> Result<(ScalingSeries, Vec<FourTermSplit>)> {
    let idx = basis.lattice();
    for &l in l_values {
        check_interior_window(idx, l)?;
    }
    let pm = p.as_mat();
    let mut points = Vec::new();
    let mut splits = Vec::new();
    for &l in l_values {
        let ell = approx_window_width(l, delta);
        let chi = box_mask(idx, l)?;
        let pl = outer_product(basis.truncated_frame(l)?.as_ref());
        let plus = outer_product(basis.truncated_frame(l + ell)?.as_ref());
        let minus = outer_product(basis.truncated_frame(l - ell)?.as_ref());

        let total = (chi.apply_left(pm) - &pl).norm_l2();
        let inner = masked_norm(&chi, true, (pm - &pl).as_ref());
        let outer = masked_norm(&chi, false, pl.as_ref());
        let terms = [
            masked_norm(&chi, true, (pm - &plus).as_ref()),
            masked_norm(&chi, true, (&plus - &pl).as_ref()),
            masked_norm(&chi, false, (&pl - &minus).as_ref()),
            masked_norm(&chi, false, minus.as_ref()),
        ];
        points.push((l, total));
        splits.push(FourTermSplit {
            l,
            ell,
            total,
            inner,
            outer,
            terms,
        });
    }
    Ok((ScalingSeries::new("approx", "L", points), splits))
}
