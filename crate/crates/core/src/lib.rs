//! Numerical laboratory for real-space topology of finite 2D insulators.
//!
//! The crate builds tight-binding Hamiltonians on a centered square lattice,
//! extracts their Fermi projectors, constructs generalized Wannier bases by the
//! projected-position method, and evaluates Chern markers together with the
//! family of truncation estimates that relate a localized basis to a vanishing
//! marker.
//!
//! Module map:
//!
//! - [`lattice`]: site/orbital indexing of the finite box `[-N, N)^2`.
//! - [`operator`]: dense Hermitian and real diagonal operators.
//! - [`model`]: two-band Chern model and atomic-limit insulator.
//! - [`spectral`]: eigensolver, Fermi projectors, masks, Schatten norms, kernel decay.
//! - [`wannier`]: generalized Wannier bases, moments, density, truncated projectors.
//! - [`chern`]: Chern markers, algebraic identities, and the k-space oracle.
//! - [`estimates`]: scaling series for the truncation estimates.
//! - [`cli`]: experiment runner behind the `lab` binary.

pub mod chern;
pub mod cli;
pub mod error;
pub mod estimates;
pub mod lattice;
pub mod model;
pub mod operator;
pub mod spectral;
pub mod wannier;

pub use error::{LabError, Result};
pub use faer::c64;
pub use lattice::{LatticeIndexing, Site};
pub use model::{Boundary, ModelKind, ModelSpec};
pub use operator::{DiagonalOperator, HermitianOperator};
pub use spectral::Projector;
pub use wannier::WannierBasis;
