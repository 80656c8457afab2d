//! Point sets attached to the isosceles triangle with vertices `(d,0)`, `(0,d)`.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{LatticeError, Point, Triangle};

/// Mirror reflection across the line `y = d - x`: `(x, y) -> (d - y, d - x)`.
///
/// On the sets `Y_0` and `m(Y_0)`, which are symmetric under `x <-> y`, this
/// agrees with `P -> (d,d) - P`.  As a map it keeps diagonal vectors
/// diagonal, so `P -> m(P)` is a diagonal bijection.
pub fn mirror(d: i64, q: Point) -> Point {
    Point::new(d - q.y, d - q.x)
}

/// Lattice points strictly inside the upper-right triangle of the square `[0,d)^2`.
pub fn upper_region(d: i64, q: Point) -> bool {
    q.x < d && q.y < d && q.x + q.y > d
}

/// Residue parameters of `d` with respect to `p0 = p % d`: `d = d1 * p0 + d0`,
/// and `d2` the inverse of `d0` modulo `p0` (0 when `p0 <= 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ResidueData {
    pub p0: i64,
    pub d0: i64,
    pub d1: i64,
    pub d2: i64,
}

impl ResidueData {
    pub fn new(d: i64, p: i64) -> Self {
        let p0 = p % d;
        if p0 <= 1 {
            return ResidueData { p0, d0: 0, d1: 0, d2: 0 };
        }
        let (d1, d0) = (d / p0, d % p0);
        let d2 = (1..p0).find(|&e| (d0 * e) % p0 == 1).unwrap_or(0);
        ResidueData { p0, d0, d1, d2 }
    }
}

/// The standing hypothesis of the distribution results: `p > 2d+1` and `p0 < d/6`.
pub fn hypothesis_holds(d: i64, p: i64) -> bool {
    p > 2 * d + 1 && 6 * (p % d) < d
}

/// Index of the anti-diagonal `x + y = k` through `q`.
pub fn anti_diagonal(q: Point) -> i64 {
    q.x + q.y
}

/// Index of the diagonal `y = x + k` through `q`.
pub fn diagonal(q: Point) -> i64 {
    q.y - q.x
}

/// The regions `K_1 = W[2d-3p0, 2d] ∩ D[-p0, p0) ∩ Y` and
/// `K_2 = W[d-3p0, d-1] ∩ D[c, c+2p0)` with `c = ceil(d/2)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RegionSpec {
    pub d: i64,
    pub p0: i64,
    pub k2_diagonal_start: i64,
}

impl RegionSpec {
    pub fn new(d: i64, p: i64) -> Self {
        RegionSpec { d, p0: p % d, k2_diagonal_start: (d + 1) / 2 }
    }

    pub fn in_k1(&self, q: Point) -> bool {
        let (w, k) = (anti_diagonal(q), diagonal(q));
        upper_region(self.d, q) && (2 * self.d - 3 * self.p0..=2 * self.d).contains(&w) && (-self.p0..self.p0).contains(&k)
    }

    pub fn in_k2(&self, q: Point) -> bool {
        let (w, k) = (anti_diagonal(q), diagonal(q));
        let c = self.k2_diagonal_start;
        (self.d - 3 * self.p0..self.d).contains(&w) && (c..c + 2 * self.p0).contains(&k)
    }
}

/// The split of `T_1` by whether `(pP)%` stays in `T_1`, and the sets `Y_0`, `m(Y_0)`.
#[derive(Clone, Debug, Serialize)]
pub struct SplitT1 {
    pub d: i64,
    pub p: i64,
    pub t11: Vec<Point>,
    pub t12: Vec<Point>,
    pub y0: Vec<Point>,
    pub my0: Vec<Point>,
}

impl SplitT1 {
    pub fn new(tri: &Triangle, p: i64) -> Result<Self, LatticeError> {
        let d = tri.require_isosceles()?;
        tri.check_prime(p)?;
        let t1 = tri.points_below(1, false);
        let in_t1 = |q: Point| q.x + q.y < d;
        let (t11, t12): (Vec<Point>, Vec<Point>) =
            t1.iter().partition(|&&q| in_t1(tri.residue(p * q)));
        let mut y0: Vec<Point> = t12.iter().map(|&q| tri.residue(p * q)).collect();
        tri.sort_canonical(&mut y0);
        let mut my0: Vec<Point> = y0.iter().map(|&q| mirror(d, q)).collect();
        tri.sort_canonical(&mut my0);

        // T_1 is the disjoint union of {(pP)% : P in T_{1,1}} and m(Y_0).
        let images: BTreeSet<Point> = t11.iter().map(|&q| tri.residue(p * q)).collect();
        let mirror_set: BTreeSet<Point> = my0.iter().copied().collect();
        let t1_set: BTreeSet<Point> = t1.iter().copied().collect();
        let union: BTreeSet<Point> = images.union(&mirror_set).copied().collect();
        if !images.is_disjoint(&mirror_set) || union != t1_set {
            return Err(LatticeError::Range("T_1 does not split as expected".into()));
        }
        Ok(SplitT1 { d, p, t11, t12, y0, my0 })
    }

    /// All `(pP)%` for `P` in `T_{1,1}`, in canonical order.
    pub fn t11_images(&self, tri: &Triangle) -> Vec<Point> {
        let mut v: Vec<Point> = self.t11.iter().map(|&q| tri.residue(self.p * q)).collect();
        tri.sort_canonical(&mut v);
        v
    }

    pub fn y0_set(&self) -> BTreeSet<Point> {
        self.y0.iter().copied().collect()
    }

    pub fn my0_set(&self) -> BTreeSet<Point> {
        self.my0.iter().copied().collect()
    }
}

/// The fundamental cell `[d-p0, d-1]^2` and its intersection with `Y_0`.
/// `size_matches` records whether `|C_0| = p0(p0-1)/2`, which holds when
/// `p0` is small against `d` but fails e.g. at `(11, 41)`.
#[derive(Clone, Debug, Serialize)]
pub struct FundamentalCell {
    pub p0: i64,
    pub cell: Vec<Point>,
    pub c0: Vec<Point>,
    pub size_matches: bool,
}

impl FundamentalCell {
    pub fn new(tri: &Triangle, split: &SplitT1) -> Self {
        let d = split.d;
        let p0 = split.p % d;
        let mut cell = Vec::new();
        for x in d - p0..d {
            for y in d - p0..d {
                cell.push(Point::new(x, y));
            }
        }
        tri.sort_canonical(&mut cell);
        let y0 = split.y0_set();
        let c0: Vec<Point> = cell.iter().copied().filter(|q| y0.contains(q)).collect();
        let size_matches = c0.len() as i64 == p0 * (p0 - 1) / 2;
        FundamentalCell { p0, cell, c0, size_matches }
    }

    /// Every point of `Y_0` is a `p0`-translate of a point of `C_0`, and every
    /// `p0`-translate of a `C_0` point that stays in the upper region lies in `Y_0`.
    pub fn periodicity_holds(&self, split: &SplitT1) -> bool {
        let d = split.d;
        let p0 = self.p0;
        if p0 == 0 {
            return split.y0.is_empty();
        }
        let y0 = split.y0_set();
        let mut generated = BTreeSet::new();
        for &c in &self.c0 {
            for i in -(d / p0 + 1)..=0 {
                for j in -(d / p0 + 1)..=0 {
                    let q = c + Point::new(i * p0, j * p0);
                    if upper_region(d, q) {
                        generated.insert(q);
                    }
                }
            }
        }
        generated == y0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i64, i64)]) -> BTreeSet<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn split_at_7_17() {
        let tri = Triangle::isosceles(7).unwrap();
        let s = SplitT1::new(&tri, 17).unwrap();
        let t12: BTreeSet<Point> = s.t12.iter().copied().collect();
        assert_eq!(
            t12,
            pts(&[(1, 2), (1, 4), (2, 1), (2, 2), (2, 3), (2, 4), (3, 2), (4, 1), (4, 2)])
        );
        assert_eq!(
            s.y0_set(),
            pts(&[(2, 6), (3, 5), (3, 6), (5, 3), (5, 6), (6, 2), (6, 3), (6, 5), (6, 6)])
        );
        assert_eq!(
            s.my0_set(),
            pts(&[(1, 1), (1, 2), (1, 4), (1, 5), (2, 1), (2, 4), (4, 1), (4, 2), (5, 1)])
        );
        let cell = FundamentalCell::new(&tri, &s);
        assert_eq!(cell.c0.iter().copied().collect::<BTreeSet<_>>(), pts(&[(5, 6), (6, 5), (6, 6)]));
        assert!(cell.periodicity_holds(&s));
    }

    #[test]
    fn ordinary_case_is_empty() {
        let tri = Triangle::isosceles(5).unwrap();
        let s = SplitT1::new(&tri, 11).unwrap();
        assert!(s.t12.is_empty() && s.y0.is_empty());
        let cell = FundamentalCell::new(&tri, &s);
        assert!(cell.c0.is_empty());
    }

    #[test]
    fn cell_at_13_41() {
        let tri = Triangle::isosceles(13).unwrap();
        let s = SplitT1::new(&tri, 41).unwrap();
        let cell = FundamentalCell::new(&tri, &s);
        assert_eq!(cell.c0, vec![Point::new(12, 12)]);
        assert!(cell.size_matches && cell.periodicity_holds(&s));
    }

    #[test]
    fn cell_size_fails_for_large_p0() {
        let tri = Triangle::isosceles(11).unwrap();
        let s = SplitT1::new(&tri, 41).unwrap();
        let cell = FundamentalCell::new(&tri, &s);
        assert_eq!((cell.c0.len(), cell.size_matches), (25, false));
    }

    #[test]
    fn residue_data() {
        let r = ResidueData::new(7, 17);
        assert_eq!((r.p0, r.d0, r.d1, r.d2), (3, 1, 2, 1));
        let r = ResidueData::new(13, 41);
        assert_eq!((r.p0, r.d0, r.d1, r.d2), (2, 1, 6, 1));
    }

    #[test]
    fn non_isosceles_rejected() {
        let tri = Triangle::new(Point::new(1, 3), Point::new(2, 1)).unwrap();
        assert!(matches!(SplitT1::new(&tri, 7), Err(LatticeError::NotIsosceles)));
    }
}
