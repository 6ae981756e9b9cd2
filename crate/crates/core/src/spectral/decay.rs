//! Kernel decay, bulk gap and ball weights of a projector.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{box_mask_unchecked, FermiState, Projector};
use crate::lattice::LatticeIndexing;
use crate::operator::{weighted_row_norm_sqr, DiagonalOperator};

/// Kernel values at or below this are treated as numerically zero.
pub const DECAY_FLOOR: f64 = 1e-12;

/// Worst-case kernel magnitude per distance and its exponential fit
/// `max |P(m, m')| ~ C exp(-gamma |m - m'|)`.
///
/// `gamma` and `prefactor` are `None` when fewer than three distances carry a
/// value above [`DECAY_FLOOR`], i.e. the kernel decays faster than any
/// exponential visible on the lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub gamma: Option<f64>,
    pub prefactor: Option<f64>,
    /// `[r, max |P|]`, sorted by `r`.
    pub samples: Vec<[f64; 2]>,
}

impl DecayFit {
    pub fn is_super_exponential(&self) -> bool {
        self.gamma.is_none()
    }

    /// Number of samples entering the fit.
    pub fn usable(&self) -> usize {
        self.samples.iter().filter(|s| s[1] > DECAY_FLOOR).count()
    }
}

pub fn kernel_decay_fit(p: &Projector, idx: &LatticeIndexing) -> DecayFit {
    assert_eq!(p.dim(), idx.total_dim());
    let q = idx.orbitals();
    let sites: Vec<_> = idx.sites().collect();
    let a = p.as_mat();
    // keyed by the exact squared distance
    let mut bins: BTreeMap<i64, f64> = BTreeMap::new();
    for (s, site_s) in sites.iter().enumerate() {
        for (t, site_t) in sites.iter().enumerate() {
            let dx = site_s.x - site_t.x;
            let dy = site_s.y - site_t.y;
            let mut block = 0.0f64;
            for i in 0..q {
                for j in 0..q {
                    block = block.max(a[(s * q + i, t * q + j)].norm());
                }
            }
            let slot = bins.entry(dx * dx + dy * dy).or_insert(0.0);
            *slot = slot.max(block);
        }
    }
    let samples: Vec<[f64; 2]> = bins
        .into_iter()
        .map(|(d2, v)| [(d2 as f64).sqrt(), v])
        .collect();

    let usable: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s[1] > DECAY_FLOOR)
        .map(|s| (s[0], s[1].ln()))
        .collect();
    let (gamma, prefactor) = match least_squares_line(&usable) {
        Some((slope, intercept)) => (Some(-slope), Some(intercept.exp())),
        None => (None, None),
    };
    DecayFit {
        gamma,
        prefactor,
        samples,
    }
}

/// Slope and intercept of the least-squares line; `None` below three points
/// or when all abscissae coincide.
pub(crate) fn least_squares_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Distance from the Fermi level to the nearest eigenvalue whose eigenvector
/// keeps more than half of its weight in the interior box `[-N/2, N/2)^2`.
/// `None` if no eigenvector qualifies.
pub fn bulk_gap(state: &FermiState, idx: &LatticeIndexing) -> Option<f64> {
    let interior = box_mask_unchecked(idx, idx.half_width() / 2);
    let v = &state.eigen.vectors;
    let mut best: Option<f64> = None;
    for (k, lambda) in state.eigen.values.iter().enumerate() {
        let col = v.col(k);
        let weight: f64 = interior
            .diagonal()
            .iter()
            .enumerate()
            .filter(|(_, d)| **d != 0.0)
            .map(|(i, _)| col[i].norm_sqr())
            .sum();
        if weight > 0.5 {
            let d = (lambda - state.fermi_level).abs();
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    }
    best
}

/// Indicator of the open disk `|m - center| < radius`.
pub fn ball_mask(idx: &LatticeIndexing, center: [f64; 2], radius: f64) -> DiagonalOperator {
    DiagonalOperator::mask(idx.total_dim(), |i| {
        let s = idx.site(i);
        let dx = s.x as f64 - center[0];
        let dy = s.y as f64 - center[1];
        dx * dx + dy * dy < radius * radius
    })
}

/// `|chi_B P|_{S2}^2` for the disk `B` of the given center and radius.
pub fn ball_weight(p: &Projector, idx: &LatticeIndexing, center: [f64; 2], radius: f64) -> f64 {
    let mask = ball_mask(idx, center, radius);
    weighted_row_norm_sqr(p.as_mat(), mask.diagonal())
}
