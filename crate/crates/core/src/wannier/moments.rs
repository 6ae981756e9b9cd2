//! Japanese-bracket moments `sum_x <x - mu>^{2s} |psi(x)|^2`.

use std::path::Path;

use faer::{c64, ColRef};
use serde::Serialize;

use super::{LatticeLabel, WannierBasis};
use crate::error::{LabError, Result};
use crate::lattice::LatticeIndexing;

const NORM_TOL: f64 = 1e-9;

/// `sum_x (|x - mu|^2 + 1)^s |psi(x)|^2` for a normalized `psi`.
pub fn moment(psi: ColRef<'_, c64>, mu: [f64; 2], s: f64, idx: &LatticeIndexing) -> Result<f64> {
    if psi.nrows() != idx.total_dim() {
        return Err(LabError::DimensionMismatch(format!(
            "vector of length {} on a lattice of dimension {}",
            psi.nrows(),
            idx.total_dim()
        )));
    }
    if !(s > 0.0) {
        return Err(LabError::InvalidParameter(format!("moment order s = {s} must be positive")));
    }
    let norm = psi.norm_l2();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(LabError::NotNormalized { norm });
    }
    let (x, y) = idx.coordinates();
    Ok(weighted_moment(psi, mu, s, &x, &y))
}

fn weighted_moment(psi: ColRef<'_, c64>, mu: [f64; 2], s: f64, x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, z) in psi.iter().enumerate() {
        let w = z.norm_sqr();
        if w != 0.0 {
            let d2 = (x[i] - mu[0]).powi(2) + (y[i] - mu[1]).powi(2);
            acc += (d2 + 1.0).powf(s) * w;
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEntry {
    pub label: Option<LatticeLabel>,
    pub center: [f64; 2],
    pub value: f64,
}

/// Moments of all stored functions of a basis for one order `s`. Padding
/// slots carry moment 0 by convention and are not part of the statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub s: f64,
    pub entries: Vec<MomentEntry>,
    pub max: f64,
    pub mean: f64,
}

impl Serialize for LatticeLabel {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("LatticeLabel", 3)?;
        st.serialize_field("m1", &self.site.x)?;
        st.serialize_field("m2", &self.site.y)?;
        st.serialize_field("j", &(self.slot + 1))?;
        st.end()
    }
}

pub fn localization_profile(basis: &WannierBasis, s_list: &[f64]) -> Result<Vec<MomentReport>> {
    let idx = basis.lattice();
    let (x, y) = idx.coordinates();
    for k in 0..basis.len() {
        let norm = basis.function(k).norm_l2();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(LabError::NotNormalized { norm });
        }
    }
    s_list
        .iter()
        .map(|&s| {
            if !(s > 0.0) {
                return Err(LabError::InvalidParameter(format!(
                    "moment order s = {s} must be positive"
                )));
            }
            let entries: Vec<MomentEntry> = (0..basis.len())
                .map(|k| {
                    let center = basis.centers()[k];
                    MomentEntry {
                        label: basis.labels().map(|l| l[k]),
                        center,
                        value: weighted_moment(basis.function(k), center, s, &x, &y),
                    }
                })
                .collect();
            let max = entries.iter().map(|e| e.value).fold(0.0, f64::max);
            let mean = if entries.is_empty() {
                0.0
            } else {
                entries.iter().map(|e| e.value).sum::<f64>() / entries.len() as f64
            };
            Ok(MomentReport { s, entries, max, mean })
        })
        .collect()
}

/// CSV with columns `label_m1, label_m2, j, s, moment` (`j` starts at 1).
pub fn write_moment_csv(path: &Path, reports: &[MomentReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["label_m1", "label_m2", "j", "s", "moment"])?;
    for r in reports {
        for e in &r.entries {
            let label = e.label.ok_or(LabError::NotRelabeled)?;
            w.write_record([
                label.site.x.to_string(),
                label.site.y.to_string(),
                (label.slot + 1).to_string(),
                format!("{:.14e}", r.s),
                format!("{:.14e}", e.value),
            ])?;
        }
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Site;
    use faer::{Col, Mat};
    use proptest::prelude::*;

    fn delta(idx: &LatticeIndexing, site: Site) -> Col<c64> {
        let mut v = Col::zeros(idx.total_dim());
        v[idx.index(site, 0).unwrap()] = c64::new(1.0, 0.0);
        v
    }

    #[test]
    fn delta_at_center() {
        let idx = LatticeIndexing::new(3, 2);
        let v = delta(&idx, Site::new(1, -2));
        for s in [0.5, 1.0, 2.5] {
            assert_eq!(moment(v.as_ref(), [1.0, -2.0], s, &idx).unwrap(), 1.0);
        }
    }

    #[test]
    fn equal_weight_pair() {
        let idx = LatticeIndexing::new(3, 2);
        let a = delta(&idx, Site::new(0, 0));
        let b = delta(&idx, Site::new(1, 0));
        let v = &(&a + &b) * 0.5f64.sqrt();
        for s in [0.5, 1.0, 1.5, 3.0] {
            let got = moment(v.as_ref(), [0.0, 0.0], s, &idx).unwrap();
            let expected = (1.0 + 2f64.powf(s)) / 2.0;
            assert!((got - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn displaced_delta() {
        let idx = LatticeIndexing::new(5, 2);
        let v = delta(&idx, Site::new(3, 4));
        assert!((moment(v.as_ref(), [0.0, 0.0], 1.0, &idx).unwrap() - 26.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unnormalized() {
        let idx = LatticeIndexing::new(2, 2);
        let v = &delta(&idx, Site::new(0, 0)) * 2.0;
        assert!(matches!(
            moment(v.as_ref(), [0.0, 0.0], 1.0, &idx),
            Err(LabError::NotNormalized { .. })
        ));
    }

    #[test]
    fn delta_profile_is_flat() {
        let idx = LatticeIndexing::new(2, 1);
        let n = idx.total_dim();
        let centers = idx.sites().map(|s| s.as_point()).collect();
        let b = WannierBasis::from_parts(Mat::identity(n, n), centers, idx)
            .unwrap()
            .relabel_to_lattice();
        let reports = localization_profile(&b, &[0.5, 1.5, 4.0]).unwrap();
        for r in &reports {
            assert_eq!(r.max, 1.0);
            assert_eq!(r.mean, 1.0);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_moment_csv(&path, &reports).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("label_m1,label_m2,j,s,moment\n"));
        assert_eq!(text.lines().count(), 1 + 3 * n);
    }

    proptest! {
        #[test]
        fn moment_at_least_one_and_monotone_in_s(
            weights in proptest::collection::vec(0.0f64..1.0, 8),
            mu in (-2.0f64..2.0, -2.0f64..2.0),
            s in 0.1f64..3.0,
        ) {
            let total: f64 = weights.iter().sum();
            prop_assume!(total > 1e-3);
            let idx = LatticeIndexing::new(1, 2);
            let v = Col::from_fn(8, |i| c64::new((weights[i] / total).sqrt(), 0.0));
            let lo = moment(v.as_ref(), [mu.0, mu.1], s, &idx).unwrap();
            let hi = moment(v.as_ref(), [mu.0, mu.1], s + 0.5, &idx).unwrap();
            prop_assert!(lo >= 1.0 - 1e-12);
            prop_assert!(hi >= lo * (1.0 - 1e-12));
        }
    }
}
