//! Finite tight-binding Hamiltonians on the box `{-N, ..., N-1}^2`.
//!
//! Two model families are provided:
//!
//! - the two-band Chern model with on-site term `u sigma_z + w(m)` and hoppings
//!   `(sigma_z - i sigma_x)/2` along `e1`, `(sigma_z - i sigma_y)/2` along `e2`.
//!   Its bulk is topological for `0 < |u| < 2` and trivial for `|u| > 2`.
//! - the atomic limit: two orbitals per site with energies `-g/2 + w(m)` and
//!   `+g/2 + w(m)` and no hopping.
//!
//! On-site disorder `w(m)` is i.i.d. uniform on `[-W/2, W/2]`, drawn in site
//! order from ChaCha8 seeded with `seed` on stream [`DISORDER_STREAM`].

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lattice::{LatticeIndexing, Site};
use crate::operator::HermitianOperator;

/// ChaCha stream carrying on-site disorder. Other streams are reserved.
pub const DISORDER_STREAM: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    TwoBandChern,
    AtomicLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Model parameters. Serializes with the keys `kind, N, u, W, seed, boundary, g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(rename = "N")]
    pub half_width: usize,
    /// Mass of the two-band model.
    pub u: f64,
    #[serde(rename = "W")]
    pub disorder: f64,
    pub seed: u64,
    pub boundary: Boundary,
    /// Level splitting of the atomic limit.
    pub g: f64,
}

impl ModelSpec {
    pub fn two_band(half_width: usize, u: f64, disorder: f64, seed: u64) -> Self {
        ModelSpec {
            kind: ModelKind::TwoBandChern,
            half_width,
            u,
            disorder,
            seed,
            boundary: Boundary::Open,
            g: 1.0,
        }
    }

    pub fn atomic(half_width: usize, g: f64, disorder: f64, seed: u64) -> Self {
        ModelSpec {
            kind: ModelKind::AtomicLimit,
            half_width,
            u: 0.0,
            disorder,
            seed,
            boundary: Boundary::Open,
            g,
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_half_width(mut self, half_width: usize) -> Self {
        self.half_width = half_width;
        self
    }

    /// Both model kinds carry two orbitals per site.
    pub fn lattice(&self) -> LatticeIndexing {
        LatticeIndexing::new(self.half_width, 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_width == 0 {
            return Err(LabError::InvalidParameter("N must be positive".into()));
        }
        if !(self.disorder >= 0.0) || !self.disorder.is_finite() {
            return Err(LabError::InvalidParameter(format!(
                "disorder strength W must be finite and >= 0, got {}",
                self.disorder
            )));
        }
        if !self.u.is_finite() {
            return Err(LabError::InvalidParameter("u must be finite".into()));
        }
        if !(self.g > 0.0) || !self.g.is_finite() {
            return Err(LabError::InvalidParameter(format!(
                "atomic gap g must be finite and > 0, got {}",
                self.g
            )));
        }
        if self.kind == ModelKind::AtomicLimit && self.disorder > self.g / 2.0 {
            return Err(LabError::InvalidParameter(format!(
                "atomic limit needs |w| <= g/4, i.e. W <= g/2 = {}, got W = {}",
                self.g / 2.0,
                self.disorder
            )));
        }
        Ok(())
    }

    /// Builds the Hamiltonian matching `kind`.
    pub fn build(&self) -> Result<HermitianOperator> {
        let idx = self.lattice();
        match self.kind {
            ModelKind::TwoBandChern => build_two_band(&idx, self),
            ModelKind::AtomicLimit => build_atomic(&idx, self),
        }
    }
}

/// On-site disorder `w(m)` for every site, in site order.
pub fn onsite_disorder(idx: &LatticeIndexing, strength: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(DISORDER_STREAM);
    (0..idx.num_sites())
        .map(|_| {
            if strength == 0.0 {
                0.0
            } else {
                strength * (rng.random::<f64>() - 0.5)
            }
        })
        .collect()
}

fn check_lattice(idx: &LatticeIndexing, spec: &ModelSpec, kind: ModelKind) -> Result<()> {
    spec.validate()?;
    if spec.kind != kind {
        return Err(LabError::DimensionMismatch(format!(
            "model kind {:?} passed to the {:?} builder",
            spec.kind, kind
        )));
    }
    if idx.orbitals() != 2 {
        return Err(LabError::DimensionMismatch(format!(
            "{kind:?} needs 2 orbitals per site, lattice has {}",
            idx.orbitals()
        )));
    }
    if idx.half_width() != spec.half_width {
        return Err(LabError::DimensionMismatch(format!(
            "lattice N = {} but model N = {}",
            idx.half_width(),
            spec.half_width
        )));
    }
    Ok(())
}

type Block = [[c64; 2]; 2];

fn adjoint(b: &Block) -> Block {
    [
        [b[0][0].conj(), b[1][0].conj()],
        [b[0][1].conj(), b[1][1].conj()],
    ]
}

fn add_block(h: &mut Mat<c64>, row: usize, col: usize, b: &Block) {
    for (r, line) in b.iter().enumerate() {
        for (c, v) in line.iter().enumerate() {
            h[(row + r, col + c)] += *v;
        }
    }
}

/// Two-band Chern model.
pub fn build_two_band(idx: &LatticeIndexing, spec: &ModelSpec) -> Result<HermitianOperator> {
    check_lattice(idx, spec, ModelKind::TwoBandChern)?;
    let zero = c64::new(0.0, 0.0);
    let half = |re: f64, im: f64| c64::new(re / 2.0, im / 2.0);
    // (sigma_z - i sigma_x) / 2
    let hop_x: Block = [[half(1.0, 0.0), half(0.0, -1.0)], [half(0.0, -1.0), half(-1.0, 0.0)]];
    // (sigma_z - i sigma_y) / 2
    let hop_y: Block = [[half(1.0, 0.0), half(-1.0, 0.0)], [half(1.0, 0.0), half(-1.0, 0.0)]];
    let hop_x_dag = adjoint(&hop_x);
    let hop_y_dag = adjoint(&hop_y);

    let n = idx.half_width() as i64;
    let dim = idx.total_dim();
    let disorder = onsite_disorder(idx, spec.disorder, spec.seed);
    let mut h = Mat::<c64>::zeros(dim, dim);

    let wrap = |v: i64| (v + n).rem_euclid(2 * n) - n;
    for (s, site) in idx.sites().enumerate() {
        let here = s * 2;
        let w = disorder[s];
        let onsite: Block = [
            [c64::new(spec.u + w, 0.0), zero],
            [zero, c64::new(-spec.u + w, 0.0)],
        ];
        add_block(&mut h, here, here, &onsite);

        for (step, hop, hop_dag) in [
            (Site::new(site.x + 1, site.y), &hop_x, &hop_x_dag),
            (Site::new(site.x, site.y + 1), &hop_y, &hop_y_dag),
        ] {
            let target = if idx.contains(step) {
                step
            } else if spec.boundary == Boundary::Periodic {
                Site::new(wrap(step.x), wrap(step.y))
            } else {
                continue;
            };
            let there = idx.site_number(target).expect("wrapped site in box") * 2;
            // amplitude for m -> m + e lives in row (m + e), column m
            add_block(&mut h, there, here, hop);
            add_block(&mut h, here, there, hop_dag);
        }
    }
    HermitianOperator::new(h)
}

/// Atomic-limit insulator: `H(m) = diag(-g/2 + w(m), g/2 + w(m))`, no hopping.
pub fn build_atomic(idx: &LatticeIndexing, spec: &ModelSpec) -> Result<HermitianOperator> {
    check_lattice(idx, spec, ModelKind::AtomicLimit)?;
    let disorder = onsite_disorder(idx, spec.disorder, spec.seed);
    let diag: Vec<f64> = disorder
        .iter()
        .flat_map(|w| [-spec.g / 2.0 + w, spec.g / 2.0 + w])
        .collect();
    Ok(HermitianOperator::from_diagonal(&diag))
}
