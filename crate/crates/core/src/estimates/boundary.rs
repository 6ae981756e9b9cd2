//! Tails of truncated projectors across a window boundary.

use serde::Serialize;

use super::{bracket, ScalingSeries};
use crate::chern::trace_of;
use crate::error::{LabError, Result};
use crate::operator::select_rows;
use crate::spectral::{box_mask, Projector};
use crate::wannier::WannierBasis;

fn check_range(basis: &WannierBasis, a: usize, b_values: &[usize], delta: f64) -> Result<()> {
    if !basis.is_relabeled() {
        return Err(LabError::NotRelabeled);
    }
    if !(delta > 0.0) {
        return Err(LabError::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if a == 0 || b_values.is_empty() || b_values.contains(&0) {
        return Err(LabError::InvalidParameter("need a >= 1 and a nonempty list of b >= 1".into()));
    }
    let n = basis.lattice().half_width();
    let reach = a + b_values.iter().max().copied().unwrap_or(0);
    if reach > n {
        return Err(LabError::WindowTooLarge {
            l: reach,
            limit: n,
            n,
        });
    }
    Ok(())
}

/// `|(1 - chi_{a+b}) P_a|_{S2}^2` against `b`, with witness
/// `C* = max_b value * b^{2(1+delta)} / a^2`.
pub fn prop_near_bd(basis: &WannierBasis, a: usize, b_values: &[usize], delta: f64) -> Result<ScalingSeries> {
    check_range(basis, a, b_values, delta)?;
    let idx = basis.lattice();
    let v = basis.truncated_frame(a)?;
    let gram = v.adjoint() * &v;
    let mut points = Vec::new();
    let mut witness = 0.0f64;
    for &b in b_values {
        let outside = box_mask(idx, a + b)?.complement();
        // |(1 - chi) V V^dagger|_F^2 = tr(V^dagger (1 - chi) V  V^dagger V)
        let k = v.adjoint() * outside.apply_left(v.as_ref());
        let value = trace_of((&k * &gram).as_ref()).re.max(0.0);
        witness = witness.max(value * (b as f64).powf(2.0 * (1.0 + delta)) / (a * a) as f64);
        points.push((b, value));
    }
    Ok(ScalingSeries::new("near_bd", "b", points).with_witness(witness))
}

/// `|chi_a (P - P_{a+b})|_{S2}^2` against `b`, with witness
/// `C* = max_b value / (b^-delta + a b^-(1+delta))`.
pub fn prop_far_bd(
    p: &Projector,
    basis: &WannierBasis,
    a: usize,
    b_values: &[usize],
    delta: f64,
) -> Result<ScalingSeries> {
    check_range(basis, a, b_values, delta)?;
    let idx = basis.lattice();
    let window = box_mask(idx, a)?.support();
    let p_rows = select_rows(p.as_mat(), &window);
    let mut points = Vec::new();
    let mut witness = 0.0f64;
    for &b in b_values {
        let v = basis.truncated_frame(a + b)?;
        let v_rows = select_rows(v.as_ref(), &window);
        let diff = &p_rows - &v_rows * v.adjoint();
        let value = diff.norm_l2().powi(2);
        let (af, bf) = (a as f64, b as f64);
        witness = witness.max(value / (bf.powf(-delta) + af * bf.powf(-(1.0 + delta))));
        points.push((b, value));
    }
    Ok(ScalingSeries::new("far_bd", "b", points).with_witness(witness))
}

/// Position of a label `m` with `|m|_inf > a` relative to the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayCase {
    /// `|m1| > a` and `|m2| > a`
    Corner,
    /// `|m1| > a` and `|m2| <= a`
    SideX,
    /// `|m1| <= a` and `|m2| > a`
    SideY,
}

impl DecayCase {
    pub fn classify(m1: i64, m2: i64, a: i64) -> Option<DecayCase> {
        match (m1.abs() > a, m2.abs() > a) {
            (true, true) => Some(DecayCase::Corner),
            (true, false) => Some(DecayCase::SideX),
            (false, true) => Some(DecayCase::SideY),
            (false, false) => None,
        }
    }

    fn slot(self) -> usize {
        match self {
            DecayCase::Corner => 0,
            DecayCase::SideX => 1,
            DecayCase::SideY => 2,
        }
    }
}

/// Window weights `|chi_a psi_m|^2` of the functions labeled outside the
/// window, compared with two bounds:
///
/// - the bare decay profile, `<D1>^-(1+d) <D2>^-(1+d)` for corners and
///   `<Di>^-2(1+d)` for sides, with `Di = |mi| - a`; the largest ratio is the
///   witness constant;
/// - the same profile multiplied by the moments of `psi_m` about `m`, which
///   bounds the weight of every normalized function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayTrickReport {
    pub a: usize,
    pub delta: f64,
    /// Functions in the corner, x-side and y-side regions.
    pub counts: [usize; 3],
    pub max_ratio: f64,
    pub max_ratio_by_case: [f64; 3],
    /// Largest weight divided by its moment bound; at most one.
    pub max_moment_ratio: f64,
}

pub fn lemma_decay_trick(basis: &WannierBasis, a: usize, delta: f64) -> Result<DecayTrickReport> {
    let labels = basis.labels().ok_or(LabError::NotRelabeled)?;
    if !(delta > 0.0) || a == 0 {
        return Err(LabError::InvalidParameter(format!("need a >= 1 and delta > 0, got a = {a}, delta = {delta}")));
    }
    let idx = basis.lattice();
    let window = box_mask(idx, a)?;
    let (xs, ys) = idx.coordinates();
    let power = 1.0 + delta;
    let mut report = DecayTrickReport {
        a,
        delta,
        counts: [0; 3],
        max_ratio: 0.0,
        max_ratio_by_case: [0.0; 3],
        max_moment_ratio: 0.0,
    };
    for (k, label) in labels.iter().enumerate() {
        let (m1, m2) = (label.site.x, label.site.y);
        let Some(case) = DecayCase::classify(m1, m2, a as i64) else {
            continue;
        };
        let psi = basis.function(k);
        let mut inside = 0.0;
        let mut moment_x = 0.0;
        let mut moment_y = 0.0;
        for (i, z) in psi.iter().enumerate() {
            let w = z.norm_sqr();
            inside += w * window.diagonal()[i];
            moment_x += w * bracket(xs[i] - m1 as f64).powf(2.0 * power);
            moment_y += w * bracket(ys[i] - m2 as f64).powf(2.0 * power);
        }
        let d1 = bracket((m1.abs() - a as i64) as f64);
        let d2 = bracket((m2.abs() - a as i64) as f64);
        let (profile, moment_bound) = match case {
            DecayCase::Corner => {
                let profile = (d1 * d2).powf(-power);
                (profile, 0.5 * (moment_x + moment_y) * profile)
            }
            DecayCase::SideX => {
                let profile = d1.powf(-2.0 * power);
                (profile, moment_x * profile)
            }
            DecayCase::SideY => {
                let profile = d2.powf(-2.0 * power);
                (profile, moment_y * profile)
            }
        };
        let slot = case.slot();
        report.counts[slot] += 1;
        let ratio = inside / profile;
        report.max_ratio = report.max_ratio.max(ratio);
        report.max_ratio_by_case[slot] = report.max_ratio_by_case[slot].max(ratio);
        if moment_bound > 0.0 {
            report.max_moment_ratio = report.max_moment_ratio.max(inside / moment_bound);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeIndexing;
    use crate::model::ModelSpec;
    use crate::spectral::fermi_projector;
    use crate::wannier::{build_gwb_pxp, DEFAULT_CLUSTER_TOL};

    fn basis(spec: &ModelSpec) -> (Projector, WannierBasis) {
        let p = fermi_projector(&spec.build().unwrap(), 0.0).unwrap();
        let b = build_gwb_pxp(&p, &spec.lattice(), DEFAULT_CLUSTER_TOL).unwrap().relabel_to_lattice();
        (p, b)
    }

    #[test]
    fn atomic_tails_vanish() {
        let (p, b) = basis(&ModelSpec::atomic(8, 2.0, 0.2, 1));
        let near = prop_near_bd(&b, 3, &[1, 2, 4], 0.5).unwrap();
        assert!(near.values().iter().all(|v| *v == 0.0));
        let far = prop_far_bd(&p, &b, 3, &[1, 2, 5], 0.5).unwrap();
        assert!(far.values().iter().all(|v| *v <= 1e-14));
        let r = lemma_decay_trick(&b, 3, 0.5).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        assert_eq!(r.counts.iter().sum::<usize>(), 256 - 49);
    }

    #[test]
    fn cases_partition_exterior() {
        let a = 2;
        let idx = LatticeIndexing::new(5, 1);
        let mut counts = [0usize; 3];
        for s in idx.sites() {
            match DecayCase::classify(s.x, s.y, a) {
                Some(c) => {
                    assert!(s.sup_norm() > a);
                    counts[c.slot()] += 1;
                }
                None => assert!(s.sup_norm() <= a),
            }
        }
        let exterior = idx.sites().filter(|s| s.sup_norm() > a).count();
        assert_eq!(counts.iter().sum::<usize>(), exterior);
    }

    #[test]
    fn trivial_tails_are_monotone_and_bounded() {
        let (p, b) = basis(&ModelSpec::two_band(8, 3.0, 0.5, 2));
        let near = prop_near_bd(&b, 2, &[1, 2, 3, 4, 6], 0.5).unwrap();
        assert!(near.is_non_increasing(1e-12));
        assert!(near.witness.unwrap().is_finite());
        let far = prop_far_bd(&p, &b, 2, &[1, 2, 3, 4, 6], 0.5).unwrap();
        assert!(far.is_non_increasing(1e-12));
        assert!(*far.values().last().unwrap() <= 1e-14);
        let r = lemma_decay_trick(&b, 3, 0.5).unwrap();
        assert!(r.max_ratio.is_finite());
        assert!(r.max_moment_ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn range_is_checked() {
        let (p, b) = basis(&ModelSpec::atomic(4, 2.0, 0.0, 0));
        assert!(matches!(prop_near_bd(&b, 2, &[3], 0.5), Err(LabError::WindowTooLarge { .. })));
        assert!(matches!(prop_far_bd(&p, &b, 2, &[1, 3], 0.5), Err(LabError::WindowTooLarge { .. })));
        assert!(prop_near_bd(&b, 2, &[2], 0.0).is_err());
    }
}
