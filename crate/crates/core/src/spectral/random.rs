//! Seeded random matrices for checks and tests.

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{eigh, Projector};
use crate::operator::HermitianOperator;

/// Entries with real and imaginary parts uniform on `[-1, 1)`.
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Mat<c64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Mat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    m
}

pub fn random_hermitian(n: usize, seed: u64) -> HermitianOperator {
    HermitianOperator::from_hermitian_part(random_matrix(n, n, seed).as_ref())
}

/// Eigenvectors of a random Hermitian matrix.
pub fn random_unitary(n: usize, seed: u64) -> Mat<c64> {
    eigh(&random_hermitian(n, seed))
        .expect("eigensolver failed on a small random matrix")
        .vectors
}

/// Projector onto `rank` columns of a random unitary.
pub fn random_projector(n: usize, rank: usize, seed: u64) -> Projector {
    assert!(rank <= n);
    let u = random_unitary(n, seed);
    Projector::from_frame(u.subcols(0, rank).to_owned())
}

/// Diagonal with entries drawn from `range`, e.g. random positions.
pub fn random_diagonal(n: usize, range: std::ops::Range<f64>, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(range.clone())).collect()
}
