//! Maximal number of centers in an open unit disk.

use std::collections::HashMap;

/// Slack on the open-disk test, absorbing roundoff in the probe points.
const DISK_SLACK: f64 = 1e-12;

/// `sup_x #{alpha : |mu_alpha - x| < 1}`.
///
/// A set of centers fits in an open unit disk iff its smallest enclosing
/// circle has radius below one, and that circle is centered at a center, at
/// the midpoint of two centers, or at the circumcenter of three. Evaluating
/// the count at all such probe points therefore attains the supremum.
pub fn bounded_density(centers: &[[f64; 2]]) -> usize {
    if centers.is_empty() {
        return 0;
    }
    let grid = Grid::new(centers);
    let mut best = 0;
    for (i, a) in centers.iter().enumerate() {
        best = best.max(grid.count_within_unit(*a));
        let near: Vec<usize> = grid
            .neighbors(*a)
            .filter(|&j| j > i && dist2(*a, centers[j]) < 4.0)
            .collect();
        for (jj, &j) in near.iter().enumerate() {
            let b = centers[j];
            best = best.max(grid.count_within_unit([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]));
            for &k in &near[jj + 1..] {
                let c = centers[k];
                if dist2(b, c) >= 4.0 {
                    continue;
                }
                if let Some(o) = circumcenter(*a, b, c) {
                    if dist2(o, *a) < 1.0 {
                        best = best.max(grid.count_within_unit(o));
                    }
                }
            }
        }
    }
    best
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn circumcenter(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Option<[f64; 2]> {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    if d.abs() < 1e-14 {
        return None;
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    Some([a[0] + (cy * b2 - by * c2) / d, a[1] + (bx * c2 - cx * b2) / d])
}

/// Spatial hash with cells of side 2.
struct Grid<'a> {
    centers: &'a [[f64; 2]],
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl<'a> Grid<'a> {
    fn new(centers: &'a [[f64; 2]]) -> Self {
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, c) in centers.iter().enumerate() {
            cells.entry(Self::cell(*c)).or_default().push(i);
        }
        Grid { centers, cells }
    }

    fn cell(p: [f64; 2]) -> (i64, i64) {
        ((p[0] / 2.0).floor() as i64, (p[1] / 2.0).floor() as i64)
    }

    /// Indices in the 3x3 block of cells around `p`; covers distance < 2.
    fn neighbors(&self, p: [f64; 2]) -> impl Iterator<Item = usize> + '_ {
        let (cx, cy) = Self::cell(p);
        (-1..=1)
            .flat_map(move |dx| (-1..=1).map(move |dy| (cx + dx, cy + dy)))
            .filter_map(|key| self.cells.get(&key))
            .flatten()
            .copied()
    }

    fn count_within_unit(&self, p: [f64; 2]) -> usize {
        self.neighbors(p)
            .filter(|&i| dist2(self.centers[i], p) < 1.0 - DISK_SLACK)
            .count()
    }
}
