//! Schatten norms.

use faer::{c64, MatRef};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schatten {
    One,
    Two,
    Inf,
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut s = a.singular_values().map_err(|_| LabError::NoConvergence)?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

pub fn schatten_norm(a: MatRef<'_, c64>, p: Schatten) -> Result<f64> {
    match p {
        Schatten::Two => Ok(a.norm_l2()),
        Schatten::One => Ok(singular_values(a)?.iter().sum()),
        Schatten::Inf => Ok(singular_values(a)?.first().copied().unwrap_or(0.0)),
    }
}

pub fn spectral_norm(a: MatRef<'_, c64>) -> Result<f64> {
    schatten_norm(a, Schatten::Inf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::eigh_hermitian_part;
    use crate::spectral::random::{random_matrix, random_unitary};
    use faer::Mat;
    use proptest::prelude::*;

    const ALL: [Schatten; 3] = [Schatten::One, Schatten::Two, Schatten::Inf];

    #[test]
    fn zero_and_identity() {
        let z = Mat::<c64>::zeros(4, 3);
        for p in ALL {
            assert_eq!(schatten_norm(z.as_ref(), p).unwrap(), 0.0);
        }
        let id = Mat::<c64>::identity(9, 9);
        assert!((schatten_norm(id.as_ref(), Schatten::Two).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn unit_outer_product() {
        let v = random_matrix(6, 1, 5);
        let v = &v * (1.0 / v.norm_l2());
        let w = random_matrix(6, 1, 6);
        let w = &w * (1.0 / w.norm_l2());
        let a = &v * w.adjoint();
        for p in ALL {
            assert!((schatten_norm(a.as_ref(), p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_norm_matches_gram_oracle() {
        let a = random_matrix(20, 20, 11);
        let gram = a.adjoint() * &a;
        let e = eigh_hermitian_part(gram.as_ref()).unwrap();
        let oracle: f64 = e.values.iter().map(|v| v.max(0.0).sqrt()).sum();
        let got = schatten_norm(a.as_ref(), Schatten::One).unwrap();
        assert!((got - oracle).abs() <= 1e-8 * oracle, "{got} vs {oracle}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn norms_are_ordered(seed in any::<u64>(), rows in 1usize..9, cols in 1usize..9) {
            let a = random_matrix(rows, cols, seed);
            let s1 = schatten_norm(a.as_ref(), Schatten::One).unwrap();
            let s2 = schatten_norm(a.as_ref(), Schatten::Two).unwrap();
            let si = schatten_norm(a.as_ref(), Schatten::Inf).unwrap();
            prop_assert!(si >= 0.0);
            prop_assert!(si <= s2 * (1.0 + 1e-12));
            prop_assert!(s2 <= s1 * (1.0 + 1e-12));
        }

        #[test]
        fn holder_trace_norm(seed in any::<u64>(), n in 1usize..10) {
            let a = random_matrix(n, n, seed);
            let b = random_matrix(n, n, seed.wrapping_add(1));
            let ab = &a * &b;
            let lhs = schatten_norm(ab.as_ref(), Schatten::One).unwrap();
            let rhs = a.norm_l2() * b.norm_l2();
            prop_assert!(lhs <= rhs * (1.0 + 1e-8));
        }

        #[test]
        fn unitary_invariance(seed in any::<u64>(), n in 1usize..10) {
            let a = random_matrix(n, n, seed);
            let u = random_unitary(n, seed ^ 0x55);
            let v = random_unitary(n, seed ^ 0xaa);
            let uav = &u * &a * &v;
            for p in ALL {
                let x = schatten_norm(a.as_ref(), p).unwrap();
                let y = schatten_norm(uav.as_ref(), p).unwrap();
                prop_assert!((x - y).abs() <= 1e-8 * x.max(1.0));
            }
        }
    }
}
