//! Marker-level estimates: the trace-norm distance between the two marker
//! forms and the leakage `(P - P_L) X P_L`.

use faer::{c64, Mat, MatRef};
use serde::Serialize;

use super::ScalingSeries;
use crate::chern::{check_interior_window, trace_of, MarkerKernel};
use crate::error::{LabError, Result};
use crate::operator::{select_cols, select_rows, DiagonalOperator};
use crate::spectral::{schatten_norm, spectral_norm, Axis, Schatten};
use crate::wannier::WannierBasis;

fn check_windows(kernel: &MarkerKernel<'_>, basis: &WannierBasis, l_values: &[usize]) -> Result<()> {
    if !basis.is_relabeled() {
        return Err(LabError::NotRelabeled);
    }
    for &l in l_values {
        check_interior_window(kernel.lattice(), l)?;
    }
    Ok(())
}

/// `|chi_L P C P chi_L - P_L C P_L|_{S1} / L^2` against `L`.
///
/// Both operators live on `span(e_W) + range(V)` for the window sites `W` and
/// the frame `V` of `P_L`, so the trace norm is evaluated on an orthonormal
/// basis `Q` of that space.
pub fn prop_pl_chern_diff(kernel: &MarkerKernel<'_>, basis: &WannierBasis, l_values: &[usize]) -> Result<ScalingSeries> {
    check_windows(kernel, basis, l_values)?;
    let mut points = Vec::new();
    for &l in l_values {
        let window = kernel.window(l)?;
        let v = basis.truncated_frame(l)?;
        let k_block = kernel.window_block(&window);
        let m_block = kernel.frame_block(v.as_ref());

        let dim = v.nrows();
        let width = window.len() + v.ncols();
        let mut g = Mat::<c64>::zeros(dim, width);
        for (c, &i) in window.iter().enumerate() {
            g[(i, c)] = c64::new(1.0, 0.0);
        }
        g.subcols_mut(window.len(), v.ncols()).copy_from(&v);
        let q = g.qr().compute_thin_Q();
        let qw = select_rows(q.as_ref(), &window);
        let qv = q.adjoint() * &v;
        let reduced = qw.adjoint() * &k_block * &qw - &qv * &m_block * qv.adjoint();
        let value = schatten_norm(reduced.as_ref(), Schatten::One)? / (l * l) as f64;
        points.push((l, value));
    }
    Ok(ScalingSeries::new("pl_chern", "L", points))
}

/// `|C|_{S_inf}` and `2 |[X, P]| |[Y, P]|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorBound {
    pub lhs: f64,
    pub rhs: f64,
}

impl CommutatorBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-10)
    }
}

/// Dense singular value decompositions; intended for small lattices.
pub fn commutator_norm_bound(kernel: &MarkerKernel<'_>) -> Result<CommutatorBound> {
    let c = kernel.curvature();
    Ok(CommutatorBound {
        lhs: spectral_norm(c.as_ref())?,
        rhs: 2.0 * spectral_norm(kernel.a())? * spectral_norm(kernel.b())?,
    })
}

/// `|tr(P_L C P_L)| <= 2 |(P - P_L) X P_L|_{S2} |(P - P_L) Y P_L|_{S2}`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderChain {
    pub l: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl HolderChain {
    pub fn holds(&self) -> bool {
        self.lhs >= 0.0 && self.rhs >= 0.0 && self.lhs <= self.rhs * (1.0 + 1e-10) + 1e-12
    }
}

/// `(P - V V^dagger) D V` for a diagonal `D`.
fn leakage(p: MatRef<'_, c64>, v: MatRef<'_, c64>, d: &DiagonalOperator) -> Mat<c64> {
    let dv = d.apply_left(v);
    let vdv = v.adjoint() * &dv;
    p * &dv - v * &vdv
}

/// `|F V^dagger|_F^2 = tr(F^dagger F V^dagger V)`, exact without assuming
/// orthonormal columns.
fn hs_norm_sqr(f: MatRef<'_, c64>, v: MatRef<'_, c64>) -> f64 {
    let ff = f.adjoint() * f;
    let vv = v.adjoint() * v;
    trace_of((&ff * &vv).as_ref()).re.max(0.0)
}

pub fn holder_chain(kernel: &MarkerKernel<'_>, basis: &WannierBasis, l: usize) -> Result<HolderChain> {
    let v = basis.truncated_frame(l)?;
    let lhs = trace_of(kernel.frame_block(v.as_ref()).as_ref()).norm();
    let (x, y) = kernel.positions();
    let p = kernel.projector().as_mat();
    let fx = hs_norm_sqr(leakage(p, v.as_ref(), x).as_ref(), v.as_ref()).sqrt();
    let fy = hs_norm_sqr(leakage(p, v.as_ref(), y).as_ref(), v.as_ref()).sqrt();
    Ok(HolderChain { l, lhs, rhs: 2.0 * fx * fy })
}

/// Split of the leakage at the inner box `L - 2 ell`:
///
/// ```text
/// total = |(P - P_L) X P_L|^2 = inner + band
/// inner = |(P - P_L) X P_{L-2ell}|^2
/// band  = |(P - P_L) X (P_L - P_{L-2ell})|^2 <= sup_m |(X - m1) psi_m|^2 * count
/// ```
///
/// with the supremum and count over the functions labeled in the band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandSplit {
    pub l: usize,
    pub ell: usize,
    pub axis: Axis,
    pub total: f64,
    pub inner: f64,
    pub band: f64,
    pub sup_spread: f64,
    pub band_count: usize,
}

impl BandSplit {
    pub fn split_residual(&self) -> f64 {
        (self.total - self.inner - self.band).abs()
    }

    pub fn band_bound(&self) -> f64 {
        self.sup_spread * self.band_count as f64
    }
}

/// `ceil(L^{2/(2+delta)})` capped at `floor(L/2) - 1`, and at least one.
pub fn band_width(l: usize, delta: f64) -> usize {
    let raw = (l as f64).powf(2.0 / (2.0 + delta)).ceil() as usize;
    raw.min((l / 2).saturating_sub(1)).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PxPlSeries {
    pub x: ScalingSeries,
    pub y: ScalingSeries,
    pub splits: Vec<BandSplit>,
}

/// `|(P - P_L) X P_L|_{S2}^2 / L^2` and the `Y` analogue against `L`, with
/// the band split at every `L` and both axes.
pub fn prop_p_x_pl(
    kernel: &MarkerKernel<'_>,
    basis: &WannierBasis,
    l_values: &[usize],
    delta: f64,
) -> Result<PxPlSeries> {
    check_windows(kernel, basis, l_values)?;
    let (x, y) = kernel.positions();
    let p = kernel.projector().as_mat();
    let labels = basis.labels().ok_or(LabError::NotRelabeled)?;
    let (xs, ys) = basis.lattice().coordinates();
    let mut px = Vec::new();
    let mut py = Vec::new();
    let mut splits = Vec::new();
    for &l in l_values {
        let ell = band_width(l, delta);
        let cols = basis.indices_within(l)?;
        let v = select_cols(basis.functions(), &cols);
        let inner_cut = l as i64 - 2 * ell as i64;
        let (inner_pos, band_pos): (Vec<usize>, Vec<usize>) =
            (0..cols.len()).partition(|&c| labels[cols[c]].site.sup_norm() <= inner_cut);
        for (axis, d, coords) in [(Axis::X, x, &xs), (Axis::Y, y, &ys)] {
            let f = leakage(p, v.as_ref(), d);
            let total = hs_norm_sqr(f.as_ref(), v.as_ref());
            let f_in = select_cols(f.as_ref(), &inner_pos);
            let v_in = select_cols(v.as_ref(), &inner_pos);
            let f_band = select_cols(f.as_ref(), &band_pos);
            let v_band = select_cols(v.as_ref(), &band_pos);
            let inner = hs_norm_sqr(f_in.as_ref(), v_in.as_ref());
            let band = hs_norm_sqr(f_band.as_ref(), v_band.as_ref());
            let mut sup_spread = 0.0f64;
            for &c in &band_pos {
                let site = labels[cols[c]].site;
                let m = match axis {
                    Axis::X => site.x,
                    Axis::Y => site.y,
                } as f64;
                let spread: f64 = v
                    .col(c)
                    .iter()
                    .zip(coords.iter())
                    .map(|(z, t)| (t - m).powi(2) * z.norm_sqr())
                    .sum();
                sup_spread = sup_spread.max(spread);
            }
            let normalized = total / (l * l) as f64;
            match axis {
                Axis::X => px.push((l, normalized)),
                Axis::Y => py.push((l, normalized)),
            }
            splits.push(BandSplit {
                l,
                ell,
                axis,
                total,
                inner,
                band,
                sup_spread,
                band_count: band_pos.len(),
            });
        }
    }
    Ok(PxPlSeries {
        x: ScalingSeries::new("p_x_pl_x", "L", px),
        y: ScalingSeries::new("p_x_pl_y", "L", py),
        splits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;
    use crate::spectral::{fermi_projector, Projector};
    use crate::wannier::{build_gwb_pxp, DEFAULT_CLUSTER_TOL};

    fn setup(spec: &ModelSpec) -> (Projector, WannierBasis) {
        let p = fermi_projector(&spec.build().unwrap(), 0.0).unwrap();
        let b = build_gwb_pxp(&p, &spec.lattice(), DEFAULT_CLUSTER_TOL).unwrap().relabel_to_lattice();
        (p, b)
    }

    #[test]
    fn band_widths() {
        assert_eq!(band_width(3, 0.5), 1);
        assert_eq!(band_width(4, 0.5), 1);
        assert_eq!(band_width(8, 0.5), 3);
        assert_eq!(band_width(100, 0.5), 40);
    }

    #[test]
    fn atomic_estimates_vanish() {
        let spec = ModelSpec::atomic(8, 2.0, 0.3, 1);
        let (p, b) = setup(&spec);
        let kernel = MarkerKernel::new(&p, &spec.lattice()).unwrap();
        let diff = prop_pl_chern_diff(&kernel, &b, &[2, 3, 4]).unwrap();
        assert!(diff.is_numerically_zero(1e-8));
        let pxpl = prop_p_x_pl(&kernel, &b, &[2, 3, 4], 0.5).unwrap();
        assert!(pxpl.x.is_numerically_zero(1e-20) && pxpl.y.is_numerically_zero(1e-20));
        let bound = commutator_norm_bound(&kernel).unwrap();
        assert!(bound.lhs < 1e-12 && bound.holds());
    }

    #[test]
    fn pl_chern_diff_matches_dense_oracle() {
        let spec = ModelSpec::two_band(4, 1.0, 0.2, 6);
        let (p, b) = setup(&spec);
        let idx = spec.lattice();
        let kernel = MarkerKernel::new(&p, &idx).unwrap();
        let series = prop_pl_chern_diff(&kernel, &b, &[1, 2]).unwrap();
        for (l, value) in series.points {
            let chi = crate::spectral::box_mask(&idx, l).unwrap().to_dense();
            let pl = b.truncated_projector(l).unwrap();
            let c = kernel.curvature();
            let pm = p.as_mat();
            let lhs = chi.as_mat() * pm * &c * pm * chi.as_mat();
            let rhs = pl.as_mat() * &c * pl.as_mat();
            let oracle = schatten_norm((&lhs - &rhs).as_ref(), Schatten::One).unwrap() / (l * l) as f64;
            assert!((value - oracle).abs() <= 1e-9 * oracle.max(1.0), "{value} vs {oracle}");
        }
    }

    #[test]
    fn trivial_model_inequalities() {
        let spec = ModelSpec::two_band(8, 3.0, 0.5, 4);
        let (p, b) = setup(&spec);
        let kernel = MarkerKernel::new(&p, &spec.lattice()).unwrap();
        assert!(commutator_norm_bound(&kernel).unwrap().holds());
        for l in 1..=4 {
            assert!(holder_chain(&kernel, &b, l).unwrap().holds());
        }
        let pxpl = prop_p_x_pl(&kernel, &b, &[2, 3, 4], 0.5).unwrap();
        for s in &pxpl.splits {
            assert!(s.split_residual() <= 1e-10 * s.total.max(1.0));
            assert!(s.band <= s.band_bound() * (1.0 + 1e-10) + 1e-14);
        }
    }
}
