//! Indexing of the finite lattice box `{-N, ..., N-1}^2` with `q` orbitals per site.

use serde::{Deserialize, Serialize};

/// Integer lattice site `m = (m1, m2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Site {
    pub x: i64,
    pub y: i64,
}

impl Site {
    pub const fn new(x: i64, y: i64) -> Self {
        Site { x, y }
    }

    /// `|m|_inf`
    pub fn sup_norm(&self) -> i64 {
        self.x.abs().max(self.y.abs())
    }

    /// Unit square `[m1 - 1/2, m1 + 1/2) x [m2 - 1/2, m2 + 1/2)` containing `point`.
    pub fn containing(point: [f64; 2]) -> Self {
        Site {
            x: (point[0] + 0.5).floor() as i64,
            y: (point[1] + 0.5).floor() as i64,
        }
    }

    pub fn as_point(&self) -> [f64; 2] {
        [self.x as f64, self.y as f64]
    }
}

/// Bijection between `(site, orbital)` pairs and linear matrix indices.
///
/// The linear index is `((m1 + N) * 2N + (m2 + N)) * q + j`, so the orbitals of
/// one site are contiguous and sites are ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeIndexing {
    half_width: usize,
    orbitals: usize,
}

impl LatticeIndexing {
    /// # Panics
    /// If either argument is zero.
    pub fn new(half_width: usize, orbitals: usize) -> Self {
        assert!(half_width > 0, "half width must be positive");
        assert!(orbitals > 0, "orbitals per site must be positive");
        LatticeIndexing {
            half_width,
            orbitals,
        }
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn orbitals(&self) -> usize {
        self.orbitals
    }

    /// Sites along one axis, `2N`.
    pub fn side(&self) -> usize {
        2 * self.half_width
    }

    pub fn num_sites(&self) -> usize {
        self.side() * self.side()
    }

    /// `4 N^2 q`
    pub fn total_dim(&self) -> usize {
        self.num_sites() * self.orbitals
    }

    pub fn contains(&self, site: Site) -> bool {
        let n = self.half_width as i64;
        (-n..n).contains(&site.x) && (-n..n).contains(&site.y)
    }

    pub fn site_number(&self, site: Site) -> Option<usize> {
        if !self.contains(site) {
            return None;
        }
        let n = self.half_width as i64;
        let side = self.side() as i64;
        Some(((site.x + n) * side + (site.y + n)) as usize)
    }

    pub fn index(&self, site: Site, orbital: usize) -> Option<usize> {
        if orbital >= self.orbitals {
            return None;
        }
        self.site_number(site).map(|s| s * self.orbitals + orbital)
    }

    pub fn site_of_number(&self, number: usize) -> Site {
        let side = self.side();
        let n = self.half_width as i64;
        Site::new((number / side) as i64 - n, (number % side) as i64 - n)
    }

    /// Inverse of [`LatticeIndexing::index`].
    pub fn decode(&self, index: usize) -> Option<(Site, usize)> {
        if index >= self.total_dim() {
            return None;
        }
        Some((
            self.site_of_number(index / self.orbitals),
            index % self.orbitals,
        ))
    }

    /// Site of a linear index (no bounds check beyond debug assertions).
    pub fn site(&self, index: usize) -> Site {
        debug_assert!(index < self.total_dim());
        self.site_of_number(index / self.orbitals)
    }

    /// Sites in linear order.
    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.num_sites()).map(move |s| self.site_of_number(s))
    }

    /// Coordinates `(m1, m2)` of every linear index, repeated across orbitals.
    pub fn coordinates(&self) -> (Vec<f64>, Vec<f64>) {
        (0..self.total_dim())
            .map(|i| {
                let s = self.site(i);
                (s.x as f64, s.y as f64)
            })
            .unzip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dims() {
        let idx = LatticeIndexing::new(3, 2);
        assert_eq!(idx.total_dim(), 4 * 9 * 2);
        assert_eq!(idx.num_sites(), 36);
        assert!(idx.contains(Site::new(-3, 2)));
        assert!(!idx.contains(Site::new(3, 0)));
        assert_eq!(idx.index(Site::new(3, 0), 0), None);
        assert_eq!(idx.index(Site::new(0, 0), 2), None);
    }

    #[test]
    fn orbitals_are_contiguous() {
        let idx = LatticeIndexing::new(2, 2);
        let a = idx.index(Site::new(-1, 1), 0).unwrap();
        assert_eq!(idx.index(Site::new(-1, 1), 1), Some(a + 1));
    }

    #[test]
    fn half_open_squares() {
        let eps = 1e-9;
        assert_eq!(Site::containing([0.5 - eps, 0.5 - eps]), Site::new(0, 0));
        assert_eq!(Site::containing([0.5, -0.5]), Site::new(1, 0));
        assert_eq!(Site::containing([-0.5 - eps, 2.0]), Site::new(-1, 2));
    }

    proptest! {
        #[test]
        fn index_is_a_bijection(n in 1usize..7, q in 1usize..4, raw in 0usize..10_000) {
            let idx = LatticeIndexing::new(n, q);
            let i = raw % idx.total_dim();
            let (site, j) = idx.decode(i).unwrap();
            prop_assert_eq!(idx.index(site, j), Some(i));
        }

        #[test]
        fn encode_decode_roundtrip(n in 1usize..7, q in 1usize..4, x in -7i64..7, y in -7i64..7, j in 0usize..4) {
            let idx = LatticeIndexing::new(n, q);
            let site = Site::new(x, y);
            match idx.index(site, j) {
                Some(i) => prop_assert_eq!(idx.decode(i), Some((site, j))),
                None => prop_assert!(!idx.contains(site) || j >= q),
            }
        }
    }
}
