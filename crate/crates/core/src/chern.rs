//! Chern markers in window and truncated-basis form, the algebraic identities
//! behind them, and a k-space Chern number for the clean two-band model.
//!
//! With `A = [X, P]`, `B = [Y, P]` and `C = [A, B]`, the markers are
//!
//! ```text
//! chi form:  (2 pi i / 4L^2) tr(chi_L P C P chi_L)
//! P_L form:  (2 pi i / 4L^2) tr(P_L C P_L)
//! ```

use std::f64::consts::PI;
use std::path::Path;

use faer::{c64, Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lattice::LatticeIndexing;
use crate::operator::{frobenius_inner, select_rows, DiagonalOperator};
use crate::spectral::{box_mask, position_operators, Projector};
use crate::wannier::WannierBasis;

/// Allowed imaginary part of a marker, relative to `max(1, |value|)`.
pub const IMAGINARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkerForm {
    ChiWindow,
    PlWindow,
}

impl MarkerForm {
    pub fn as_str(&self) -> &'static str {
        match self {
            MarkerForm::ChiWindow => "chi_window",
            MarkerForm::PlWindow => "pl_window",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerResult {
    #[serde(rename = "L")]
    pub l: usize,
    pub value: f64,
    pub imaginary_residual: f64,
    pub form: MarkerForm,
}

impl MarkerResult {
    fn from_trace(l: usize, trace: c64, form: MarkerForm) -> Self {
        let z = c64::new(0.0, 2.0 * PI) * trace / (4.0 * (l * l) as f64);
        MarkerResult {
            l,
            value: z.re,
            imaginary_residual: z.im.abs(),
            form,
        }
    }

    pub fn is_real(&self) -> bool {
        self.imaginary_residual <= IMAGINARY_TOL * self.value.abs().max(1.0)
    }
}

/// Marker rows with columns `model_hash, N, L, form, value, imag_residual`.
pub fn write_marker_csv(path: &Path, model_hash: &str, n: usize, rows: &[MarkerResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["model_hash", "N", "L", "form", "value", "imag_residual"])?;
    for r in rows {
        w.write_record([
            model_hash.to_string(),
            n.to_string(),
            r.l.to_string(),
            r.form.as_str().to_string(),
            format!("{:.14e}", r.value),
            format!("{:.14e}", r.imaginary_residual),
        ])?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

/// Rejects windows outside `1 <= L <= N/2`.
pub fn check_interior_window(idx: &LatticeIndexing, l: usize) -> Result<()> {
    if l == 0 {
        return Err(LabError::InvalidParameter("window L must be positive".into()));
    }
    let limit = idx.half_width() / 2;
    if l > limit {
        return Err(LabError::WindowTooLarge {
            l,
            limit,
            n: idx.half_width(),
        });
    }
    Ok(())
}

/// Dense `P`, `A = [X, P]` and `B = [Y, P]`, shared by all marker windows of
/// one projector.
pub struct MarkerKernel<'p> {
    p: &'p Projector,
    idx: LatticeIndexing,
    x: DiagonalOperator,
    y: DiagonalOperator,
    a: Mat<c64>,
    b: Mat<c64>,
}

impl<'p> MarkerKernel<'p> {
    pub fn new(p: &'p Projector, idx: &LatticeIndexing) -> Result<Self> {
        if p.dim() != idx.total_dim() {
            return Err(LabError::DimensionMismatch(format!(
                "projector has dimension {}, lattice has {}",
                p.dim(),
                idx.total_dim()
            )));
        }
        let (x, y) = position_operators(idx);
        let a = x.commutator(p.as_mat());
        let b = y.commutator(p.as_mat());
        Ok(MarkerKernel {
            p,
            idx: *idx,
            x,
            y,
            a,
            b,
        })
    }

    pub fn projector(&self) -> &Projector {
        self.p
    }

    pub fn lattice(&self) -> &LatticeIndexing {
        &self.idx
    }

    pub fn positions(&self) -> (&DiagonalOperator, &DiagonalOperator) {
        (&self.x, &self.y)
    }

    /// `[X, P]`
    pub fn a(&self) -> MatRef<'_, c64> {
        self.a.as_ref()
    }

    /// `[Y, P]`
    pub fn b(&self) -> MatRef<'_, c64> {
        self.b.as_ref()
    }

    /// Dense `C = [[X, P], [Y, P]]`.
    pub fn curvature(&self) -> Mat<c64> {
        &self.a * &self.b - &self.b * &self.a
    }

    /// Linear indices inside `[-L, L)^2`.
    pub fn window(&self, l: usize) -> Result<Vec<usize>> {
        Ok(box_mask(&self.idx, l)?.support())
    }

    /// `(P C P)` restricted to the window rows and columns.
    pub fn window_block(&self, window: &[usize]) -> Mat<c64> {
        let r = select_rows(self.p.as_mat(), window);
        let rc = &r * &self.a * &self.b - &r * &self.b * &self.a;
        &rc * r.adjoint()
    }

    /// `tr(chi P C P chi)` over the window, without forming the block.
    pub fn window_trace(&self, window: &[usize]) -> c64 {
        let r = select_rows(self.p.as_mat(), window);
        let rc = &r * &self.a * &self.b - &r * &self.b * &self.a;
        // tr(R C R^dagger) = sum_ij conj(R_ij) (R C)_ij
        frobenius_inner(r.as_ref(), rc.as_ref())
    }

    /// `V^dagger C V` for a frame `V`.
    pub fn frame_block(&self, v: MatRef<'_, c64>) -> Mat<c64> {
        let av = &self.a * v;
        let bv = &self.b * v;
        let c_v = &self.a * &bv - &self.b * &av;
        v.adjoint() * &c_v
    }

    pub fn chi_marker(&self, l: usize) -> Result<MarkerResult> {
        check_interior_window(&self.idx, l)?;
        let window = self.window(l)?;
        Ok(MarkerResult::from_trace(l, self.window_trace(&window), MarkerForm::ChiWindow))
    }

    pub fn pl_marker(&self, basis: &WannierBasis, l: usize) -> Result<MarkerResult> {
        check_interior_window(&self.idx, l)?;
        let v = basis.truncated_frame(l)?;
        let trace = trace_of(self.frame_block(v.as_ref()).as_ref());
        Ok(MarkerResult::from_trace(l, trace, MarkerForm::PlWindow))
    }
}

pub fn trace_of(a: MatRef<'_, c64>) -> c64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// `(2 pi i / 4L^2) tr(chi_L P C P chi_L)` for `1 <= L <= N/2`.
pub fn chern_marker_chi(p: &Projector, idx: &LatticeIndexing, l: usize) -> Result<MarkerResult> {
    check_interior_window(idx, l)?;
    MarkerKernel::new(p, idx)?.chi_marker(l)
}

/// `(2 pi i / 4L^2) tr(P_L C P_L)` for a relabeled basis and `1 <= L <= N/2`.
pub fn chern_marker_pl(
    p: &Projector,
    basis: &WannierBasis,
    idx: &LatticeIndexing,
    l: usize,
) -> Result<MarkerResult> {
    check_interior_window(idx, l)?;
    if !basis.is_relabeled() {
        return Err(LabError::NotRelabeled);
    }
    MarkerKernel::new(p, idx)?.pl_marker(basis, l)
}

/// `|P C P - [PXP, PYP]|_F`, an upper bound on the spectral-norm residual.
pub fn commutator_identity_residual(p: &Projector, x: &DiagonalOperator, y: &DiagonalOperator) -> f64 {
    let pm = p.as_mat();
    let a = x.commutator(pm);
    let b = y.commutator(pm);
    let c = &a * &b - &b * &a;
    let pcp = pm * &c * pm;
    let pxp = pm * x.apply_left(pm);
    let pyp = pm * y.apply_left(pm);
    let comm = &pxp * &pyp - &pyp * &pxp;
    (&pcp - &comm).norm_l2()
}

/// Both sides of `tr(P_L C P_L) = tr(P_L X (P - P_L) Y P_L - P_L Y (P - P_L) X P_L)`
/// and the trace of `[P_L X P_L, P_L Y P_L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceReduction {
    pub lhs: c64,
    pub rhs: c64,
    pub commutator_trace: c64,
    pub rank: usize,
}

impl TraceReduction {
    pub fn mismatch(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }
}

pub fn trace_reduction_check(kernel: &MarkerKernel<'_>, basis: &WannierBasis, l: usize) -> Result<TraceReduction> {
    let v = basis.truncated_frame(l)?;
    let lhs = trace_of(kernel.frame_block(v.as_ref()).as_ref());
    let (x, y) = kernel.positions();
    let xv = x.apply_left(v.as_ref());
    let yv = y.apply_left(v.as_ref());
    let vxv = v.adjoint() * &xv;
    let vyv = v.adjoint() * &yv;
    let p = kernel.projector().as_mat();
    // (P - P_L) Y V and (P - P_L) X V
    let qyv = p * &yv - &v * &vyv;
    let qxv = p * &xv - &v * &vxv;
    let rhs = frobenius_inner(xv.as_ref(), qyv.as_ref()) - frobenius_inner(yv.as_ref(), qxv.as_ref());
    let commutator_trace = trace_of((&vxv * &vyv - &vyv * &vxv).as_ref());
    Ok(TraceReduction {
        lhs,
        rhs,
        commutator_trace,
        rank: v.ncols(),
    })
}

/// Bloch vector `d(k)` of `h(k) = sin k1 sx + sin k2 sy + (u + cos k1 + cos k2) sz`.
fn bloch_vector(u: f64, k1: f64, k2: f64) -> [f64; 3] {
    [k1.sin(), k2.sin(), u + k1.cos() + k2.cos()]
}

/// Normalized lower-band eigenvector of `d . sigma`, using whichever of two
/// analytic formulas is better conditioned.
fn lower_state(d: [f64; 3]) -> [c64; 2] {
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let a = [c64::new(d[0], -d[1]), c64::new(-(d[2] + r), 0.0)];
    let b = [c64::new(r - d[2], 0.0), c64::new(-d[0], -d[1])];
    let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let nb = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
    if na >= nb {
        [a[0] / na, a[1] / na]
    } else {
        [b[0] / nb, b[1] / nb]
    }
}

fn link(a: &[c64; 2], b: &[c64; 2]) -> c64 {
    let z = a[0].conj() * b[0] + a[1].conj() * b[1];
    z / z.norm()
}

/// Chern number of the lower band of the clean two-band model by the lattice
/// field-strength method on a `grid x grid` Brillouin-zone mesh.
pub fn fhs_chern_number(u: f64, grid: usize) -> Result<i64> {
    if grid < 8 {
        return Err(LabError::InvalidParameter(format!("grid must be at least 8, got {grid}")));
    }
    if !u.is_finite() {
        return Err(LabError::InvalidParameter(format!("mass u = {u}")));
    }
    // the gap 2|d(k)| closes at |u| in {0, 2}
    let closing = [0.0, 2.0].iter().map(|c| (u.abs() - c).abs()).fold(f64::MAX, f64::min);
    if closing < 1e-9 {
        return Err(LabError::Gapless { u });
    }
    let step = 2.0 * PI / grid as f64;
    let states: Vec<[c64; 2]> = (0..grid * grid)
        .map(|n| lower_state(bloch_vector(u, (n / grid) as f64 * step, (n % grid) as f64 * step)))
        .collect();
    let at = |i: usize, j: usize| &states[(i % grid) * grid + (j % grid)];
    let mut total = 0.0;
    for i in 0..grid {
        for j in 0..grid {
            let plaquette = link(at(i, j), at(i + 1, j))
                * link(at(i + 1, j), at(i + 1, j + 1))
                * link(at(i + 1, j + 1), at(i, j + 1))
                * link(at(i, j + 1), at(i, j));
            total += plaquette.arg();
        }
    }
    let value = total / (2.0 * PI);
    let rounded = value.round();
    if (value - rounded).abs() > 1e-6 {
        return Err(LabError::NonIntegerChern { value });
    }
    Ok(rounded as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;
    use crate::spectral::fermi_projector;
    use crate::spectral::random::{random_diagonal, random_projector};
    use crate::wannier::{build_gwb_pxp, build_gwb_pxp_adaptive, DEFAULT_CLUSTER_TOL};

    fn setup(spec: &ModelSpec) -> (LatticeIndexing, Projector) {
        let idx = spec.lattice();
        let p = fermi_projector(&spec.build().unwrap(), 0.0).unwrap();
        (idx, p)
    }

    #[test]
    fn pl_marker_of_pxp_basis_vanishes_in_both_phases() {
        // V^dagger PXP V is block diagonal by cluster and V^dagger PYP V is
        // diagonal inside each block, so every diagonal entry of the
        // commutator is zero.
        for u in [1.0, 3.0] {
            let (idx, p) = setup(&ModelSpec::two_band(6, u, 0.0, 0));
            let basis = build_gwb_pxp_adaptive(&p, &idx, DEFAULT_CLUSTER_TOL).unwrap().0.relabel_to_lattice();
            let kernel = MarkerKernel::new(&p, &idx).unwrap();
            assert!(kernel.pl_marker(&basis, 3).unwrap().value.abs() < 1e-10);
        }
    }

    #[test]
    fn fhs_values() {
        for grid in [12, 24, 48] {
            assert_eq!(fhs_chern_number(3.0, grid).unwrap(), 0);
            assert_eq!(fhs_chern_number(-3.0, grid).unwrap(), 0);
        }
        let plus = fhs_chern_number(1.0, 12).unwrap();
        assert_eq!(plus.abs(), 1);
        assert_eq!(fhs_chern_number(1.0, 48).unwrap(), plus);
        assert_eq!(fhs_chern_number(-1.0, 24).unwrap(), -plus);
        assert!(matches!(fhs_chern_number(2.0, 12), Err(LabError::Gapless { .. })));
        assert!(matches!(fhs_chern_number(0.0, 12), Err(LabError::Gapless { .. })));
        assert!(matches!(fhs_chern_number(1.0, 4), Err(LabError::InvalidParameter(_))));
    }

    #[test]
    fn lower_state_is_eigenvector() {
        for d in [[0.3, -0.2, 0.9], [0.0, 0.0, -1.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0]] {
            let v = lower_state(d);
            let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let h = [
                [c64::new(d[2], 0.0), c64::new(d[0], -d[1])],
                [c64::new(d[0], d[1]), c64::new(-d[2], 0.0)],
            ];
            for row in 0..2 {
                let hv = h[row][0] * v[0] + h[row][1] * v[1];
                assert!((hv + v[row] * r).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn windows_are_interior() {
        let idx = LatticeIndexing::new(8, 2);
        assert!(check_interior_window(&idx, 4).is_ok());
        assert!(matches!(check_interior_window(&idx, 5), Err(LabError::WindowTooLarge { .. })));
        assert!(check_interior_window(&idx, 0).is_err());
    }

    #[test]
    fn atomic_markers_vanish() {
        let spec = ModelSpec::atomic(6, 2.0, 0.4, 3);
        let (idx, p) = setup(&spec);
        let basis = build_gwb_pxp(&p, &idx, DEFAULT_CLUSTER_TOL).unwrap().relabel_to_lattice();
        let kernel = MarkerKernel::new(&p, &idx).unwrap();
        for l in 1..=3 {
            let chi = kernel.chi_marker(l).unwrap();
            let pl = kernel.pl_marker(&basis, l).unwrap();
            assert!(chi.value.abs() <= 1e-8 && pl.value.abs() <= 1e-8);
            let tr = trace_reduction_check(&kernel, &basis, l).unwrap();
            assert!(tr.lhs.norm() <= 1e-8 && tr.rhs.norm() <= 1e-8);
        }
        let (x, y) = position_operators(&idx);
        assert!(commutator_identity_residual(&p, &x, &y) <= 1e-12);
    }

    #[test]
    fn window_trace_matches_dense_oracle() {
        let spec = ModelSpec::two_band(4, 1.0, 0.3, 7);
        let (idx, p) = setup(&spec);
        let kernel = MarkerKernel::new(&p, &idx).unwrap();
        let window = kernel.window(2).unwrap();
        // dense chi P C P chi
        let chi = box_mask(&idx, 2).unwrap().to_dense();
        let pm = p.as_mat();
        let full = chi.as_mat() * pm * kernel.curvature() * pm * chi.as_mat();
        let oracle = trace_of(full.as_ref());
        assert!((kernel.window_trace(&window) - oracle).norm() < 1e-10);
        assert!((trace_of(kernel.window_block(&window).as_ref()) - oracle).norm() < 1e-10);
    }

    #[test]
    fn full_sample_trace_vanishes() {
        let spec = ModelSpec::two_band(4, 1.0, 0.0, 0);
        let (idx, p) = setup(&spec);
        let kernel = MarkerKernel::new(&p, &idx).unwrap();
        let all: Vec<usize> = (0..idx.total_dim()).collect();
        let t = kernel.window_trace(&all);
        assert!(t.norm() <= 1e-8 * 64.0, "{t}");
    }

    #[test]
    fn identity_on_random_projector() {
        let p = random_projector(20, 5, 42);
        let x = DiagonalOperator::new(random_diagonal(20, -3.0..3.0, 1));
        let y = DiagonalOperator::new(random_diagonal(20, -3.0..3.0, 2));
        let scale = x.norm() * y.norm();
        assert!(commutator_identity_residual(&p, &x, &y) <= 1e-10 * scale);
    }

    #[test]
    fn marker_sign_and_quantization() {
        let c = fhs_chern_number(1.0, 24).unwrap() as f64;
        let (idx, p) = setup(&ModelSpec::two_band(12, 1.0, 0.0, 0));
        let plus = chern_marker_chi(&p, &idx, 3).unwrap();
        assert!(plus.is_real());
        assert!((plus.value - c).abs() < 0.2, "marker {} vs {c}", plus.value);
        let (idx, p) = setup(&ModelSpec::two_band(12, -1.0, 0.0, 0));
        let minus = chern_marker_chi(&p, &idx, 3).unwrap();
        assert!((plus.value + minus.value).abs() < 0.02);
    }

    #[test]
    fn trace_reduction_on_trivial_model() {
        let spec = ModelSpec::two_band(8, 3.0, 0.5, 1);
        let (idx, p) = setup(&spec);
        let basis = build_gwb_pxp(&p, &idx, DEFAULT_CLUSTER_TOL).unwrap().relabel_to_lattice();
        let kernel = MarkerKernel::new(&p, &idx).unwrap();
        for l in 1..=4 {
            let tr = trace_reduction_check(&kernel, &basis, l).unwrap();
            assert!(tr.mismatch() <= 1e-8 * tr.lhs.norm().max(1.0));
            let scale = 64.0 * tr.rank as f64;
            assert!(tr.commutator_trace.norm() <= 1e-8 * scale);
        }
        let empty = WannierBasis::from_parts(Mat::zeros(idx.total_dim(), 0), vec![], idx)
            .unwrap()
            .relabel_to_lattice();
        let tr = trace_reduction_check(&kernel, &empty, 2).unwrap();
        assert_eq!((tr.lhs, tr.rhs, tr.rank), (c64::new(0.0, 0.0), c64::new(0.0, 0.0), 0));
    }
}
