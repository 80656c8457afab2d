//! The functionals `h`, `h1`, `h2` on bijections between lattice multisets,
//! the greedy minimal permutation, and the improved Hodge polygon.

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{Point, Triangle};
use crate::polygon::{qser, PolygonHull, Q64};

pub mod assignment;
pub mod closed_form;

pub use assignment::assignment_oracle;
pub use closed_form::{closed_form_vertices, gnp_slope_bands, SlopeBand, SlopeBandReport, VertexFormulas};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HodgeError {
    #[error("source has {0} points but target has {1}")]
    SizeMismatch(usize, usize),
    #[error("map is not a bijection")]
    NotBijective,
    #[error("point outside the domain: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
}

/// Cost model for pairing a source point `P` with a target `Q`: the weight
/// of `pQ - P`.
#[derive(Clone, Debug)]
pub struct Frobenius<'a> {
    pub tri: &'a Triangle,
    pub p: i64,
}

impl<'a> Frobenius<'a> {
    pub fn new(tri: &'a Triangle, p: i64) -> Self {
        Frobenius { tri, p }
    }

    pub fn arrow(&self, src: Point, dst: Point) -> Point {
        self.p * dst - src
    }

    /// `ceil(w(pQ - P))`.
    pub fn cost(&self, src: Point, dst: Point) -> i64 {
        self.tri.weight(self.arrow(src, dst)).ceil()
    }

    /// `R(w(pQ - P))` scaled by `det`: `det * ceil(r) - det * r`.
    pub fn residual(&self, src: Point, dst: Point) -> i64 {
        let w = self.tri.weight(self.arrow(src, dst));
        w.ceil() * w.den - w.num
    }
}

/// A bijection `sources[i] -> targets[map[i]]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub sources: Vec<Point>,
    pub targets: Vec<Point>,
    pub map: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Scores {
    pub h: i64,
    #[serde(serialize_with = "qser::one")]
    pub h1: Q64,
    #[serde(serialize_with = "qser::one")]
    pub h2: Q64,
    /// Sorted residuals `R(w(pτ(P)-P))`, as numerators over `det`.
    pub ustar: Vec<i64>,
}

impl Assignment {
    pub fn new(sources: Vec<Point>, targets: Vec<Point>, map: Vec<usize>) -> Result<Self, HodgeError> {
        if sources.len() != targets.len() || map.len() != sources.len() {
            return Err(HodgeError::SizeMismatch(sources.len(), targets.len()));
        }
        let mut seen = vec![false; map.len()];
        for &j in &map {
            if j >= seen.len() || std::mem::replace(&mut seen[j], true) {
                return Err(HodgeError::NotBijective);
            }
        }
        Ok(Assignment { sources, targets, map })
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.sources.iter().zip(&self.map).map(|(&s, &j)| (s, self.targets[j]))
    }

    pub fn score(&self, frob: &Frobenius<'_>) -> Scores {
        let det = frob.tri.det();
        let mut h = 0;
        let mut lin = 0i64;
        let mut ustar = Vec::with_capacity(self.map.len());
        for (s, t) in self.pairs() {
            h += frob.cost(s, t);
            lin += frob.tri.weight_num(frob.arrow(s, t));
            ustar.push(frob.residual(s, t));
        }
        ustar.sort_unstable();
        let h1 = Ratio::new(lin, det);
        Scores { h, h1, h2: Q64::from_integer(h) - h1, ustar }
    }
}

/// `h` of a bijection given as explicit pairs.
pub fn score_assignment(frob: &Frobenius<'_>, a: &Assignment) -> Scores {
    a.score(frob)
}

/// `(p-1) * Σ w(P)` for a multiset, the linear part of `h` for self-maps.
pub fn h1_of(frob: &Frobenius<'_>, s: &[Point]) -> Q64 {
    let num: i64 = s.iter().map(|&q| frob.tri.weight_num(q)).sum();
    Ratio::new((frob.p - 1) * num, frob.tri.det())
}

/// Repeatedly pair the remaining `(P, Q)` with least residual `R(w(pQ-P))`,
/// ties broken by position in `s`.  When `reverse_ties` is set, later
/// positions win ties instead.
pub fn greedy_minimal_permutation_with(frob: &Frobenius<'_>, s: &[Point], reverse_ties: bool) -> Assignment {
    let n = s.len();
    let res: Vec<Vec<i64>> = s.iter().map(|&a| s.iter().map(|&b| frob.residual(a, b)).collect()).collect();
    let mut row_free = vec![true; n];
    let mut col_free = vec![true; n];
    let mut map = vec![usize::MAX; n];
    let order: Vec<usize> = if reverse_ties { (0..n).rev().collect() } else { (0..n).collect() };
    for _ in 0..n {
        let mut best: Option<(i64, usize, usize)> = None;
        for &i in order.iter().filter(|&&i| row_free[i]) {
            for &j in order.iter().filter(|&&j| col_free[j]) {
                if best.is_none_or(|(r, _, _)| res[i][j] < r) {
                    best = Some((res[i][j], i, j));
                }
            }
        }
        let (_, i, j) = best.expect("free pair exists");
        row_free[i] = false;
        col_free[j] = false;
        map[i] = j;
    }
    Assignment { sources: s.to_vec(), targets: s.to_vec(), map }
}

pub fn greedy_minimal_permutation(frob: &Frobenius<'_>, s: &[Point]) -> Assignment {
    greedy_minimal_permutation_with(frob, s, false)
}

/// Minimal `h` over permutations of `s`.
pub fn h_min(frob: &Frobenius<'_>, s: &[Point]) -> i64 {
    greedy_minimal_permutation(frob, s).score(frob).h
}

/// The improved Hodge polygon from the weight-minimal prefixes of `M(Δ)`.
#[derive(Clone, Debug, Serialize)]
pub struct ImprovedHodge {
    pub hull: PolygonHull,
    /// `h` of the `ℓ` lowest points, `ℓ = 0..=l_max`.
    pub prefix_h: Vec<i64>,
    /// Set when the standing hypothesis on `p` fails, so minimality of the
    /// weight-minimal prefixes is not guaranteed.
    pub unverified_minimality: bool,
}

pub fn ihp(frob: &Frobenius<'_>, l_max: usize) -> ImprovedHodge {
    let tri = frob.tri;
    let mut cap = tri.det();
    let pts = loop {
        let v = tri.cone_points_up_to(cap);
        // Keep every point tied in weight with the last one we need.
        if v.len() > l_max {
            break v;
        }
        cap += tri.det();
    };
    let certified = tri.prime_is_large(frob.p);
    let prefix_h: Vec<i64> = (0..=l_max).map(|l| h_min(frob, &pts[..l])).collect();
    let points: Vec<(i64, Q64, bool)> = prefix_h
        .iter()
        .enumerate()
        .map(|(l, &h)| (l as i64, Q64::from_integer(h), certified))
        .collect();
    ImprovedHodge { hull: PolygonHull::lower_hull(&points), prefix_h, unverified_minimality: !certified }
}

/// The explicit minimal permutation of `T_1` at `d = 7`, `p = 17`,
/// listed as `(P, τ^{-1}(P))`, with the two entries `(0,6)` and `(1,3)`
/// fixed so that the table is a permutation.
pub fn example_tau_inverse() -> Vec<(Point, Point)> {
    let rows: [((i64, i64), (i64, i64)); 28] = [
        ((0, 0), (0, 0)),
        ((0, 1), (0, 3)),
        ((0, 2), (0, 6)),
        ((0, 3), (0, 2)),
        ((0, 4), (0, 5)),
        ((0, 5), (0, 1)),
        ((0, 6), (0, 4)),
        ((1, 0), (3, 0)),
        ((1, 1), (3, 3)),
        ((1, 3), (3, 2)),
        ((1, 5), (3, 1)),
        ((2, 0), (6, 0)),
        ((3, 0), (2, 0)),
        ((3, 1), (2, 3)),
        ((3, 3), (2, 2)),
        ((4, 0), (5, 0)),
        ((5, 0), (1, 0)),
        ((5, 1), (1, 3)),
        ((6, 0), (4, 0)),
        ((1, 2), (2, 1)),
        ((1, 4), (1, 1)),
        ((2, 1), (4, 1)),
        ((2, 2), (2, 4)),
        ((2, 3), (5, 1)),
        ((2, 4), (1, 4)),
        ((3, 2), (1, 2)),
        ((4, 1), (4, 2)),
        ((4, 2), (1, 5)),
    ];
    rows.iter().map(|&((a, b), (c, d))| (Point::new(a, b), Point::new(c, d))).collect()
}

/// The example permutation as an assignment `T_1 -> T_1` at `d = 7`.
pub fn example_assignment(tri: &Triangle) -> Result<Assignment, HodgeError> {
    let t1 = tri.points_below(1, false);
    let mut map = vec![usize::MAX; t1.len()];
    for (img, src) in example_tau_inverse() {
        let (Some(i), Some(j)) = (t1.iter().position(|&q| q == src), t1.iter().position(|&q| q == img)) else {
            return Err(HodgeError::Mismatch(format!("{src} or {img} is not in T_1")));
        };
        map[i] = j;
    }
    Assignment::new(t1.clone(), t1, map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: i64, y: i64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn trivial_scores() {
        let tri = Triangle::isosceles(7).unwrap();
        let frob = Frobenius::new(&tri, 17);
        let a = Assignment::new(vec![Point::ORIGIN], vec![Point::ORIGIN], vec![0]).unwrap();
        assert_eq!(a.score(&frob).h, 0);
        assert!(Assignment::new(vec![Point::ORIGIN], vec![], vec![0]).is_err());
        assert!(Assignment::new(vec![pt(0, 0), pt(1, 0)], vec![pt(0, 0), pt(1, 0)], vec![1, 1]).is_err());
    }

    #[test]
    fn identity_at_5_11() {
        let tri = Triangle::isosceles(5).unwrap();
        let frob = Frobenius::new(&tri, 11);
        let t1 = tri.points_below(1, false);
        let a = Assignment::new(t1.clone(), t1.clone(), (0..t1.len()).collect()).unwrap();
        assert_eq!(a.score(&frob).h, 80);
    }

    #[test]
    fn greedy_on_t1_at_7_17() {
        let tri = Triangle::isosceles(7).unwrap();
        let frob = Frobenius::new(&tri, 17);
        let t1 = tri.points_below(1, false);
        let g = greedy_minimal_permutation(&frob, &t1);
        let s = g.score(&frob);
        assert_eq!(s.h, 259);
        assert_eq!(Q64::from_integer(s.h), s.h1 + s.h2);
    }

    #[test]
    fn example_permutation_is_minimal() {
        let tri = Triangle::isosceles(7).unwrap();
        let frob = Frobenius::new(&tri, 17);
        let a = example_assignment(&tri).unwrap();
        assert_eq!(a.score(&frob).h, 259);
    }

    #[test]
    fn greedy_ustar_independent_of_ties() {
        let tri = Triangle::isosceles(7).unwrap();
        let frob = Frobenius::new(&tri, 17);
        let t2 = tri.points_below(2, false);
        let a = greedy_minimal_permutation_with(&frob, &t2, false).score(&frob);
        let b = greedy_minimal_permutation_with(&frob, &t2, true).score(&frob);
        assert_eq!(a.ustar, b.ustar);
    }

    #[test]
    fn ihp_vertices_at_7_17() {
        let tri = Triangle::isosceles(7).unwrap();
        let frob = Frobenius::new(&tri, 17);
        let ih = ihp(&frob, 40);
        assert!(!ih.unverified_minimality);
        assert_eq!(ih.prefix_h[0], 0);
        assert_eq!(ih.prefix_h[1], 0);
        assert!(ih.hull.has_vertex(28, Q64::from_integer(259)));
        assert!(ih.hull.has_vertex(36, Q64::from_integer(259 + 8 * 16)));
        let i = ih.hull.vertices.iter().position(|v| v.0 == 28).unwrap();
        assert_eq!(ih.hull.vertices[i + 1].0, 36);
    }

    #[test]
    fn ihp_flags_small_primes() {
        let tri = Triangle::isosceles(7).unwrap();
        let frob = Frobenius::new(&tri, 11);
        assert!(ihp(&frob, 10).unverified_minimality);
    }
}
