//! Lattice geometry of a triangle with one vertex at the origin.
//!
//! Weights are kept as integer numerators over the triangle determinant so
//! that every comparison, floor and ceiling is exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod iso;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("degenerate or negatively oriented triangle: det = {0}")]
    BadDeterminant(i64),
    #[error("prime {p} divides the determinant {det}")]
    PrimeDividesDet { p: i64, det: i64 },
    #[error("operation needs the isosceles triangle with vertices (d,0), (0,d)")]
    NotIsosceles,
    #[error("parameter out of range: {0}")]
    Range(String),
}

/// A lattice point; serialized as `[x, y]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }

    /// Reflection through the diagonal `y = x`.
    pub fn swapped(self) -> Self {
        Point::new(self.y, self.x)
    }
}

impl From<[i64; 2]> for Point {
    fn from(a: [i64; 2]) -> Self {
        Point::new(a[0], a[1])
    }
}

impl From<Point> for [i64; 2] {
    fn from(q: Point) -> Self {
        [q.x, q.y]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl Mul<Point> for i64 {
    type Output = Point;
    fn mul(self, q: Point) -> Point {
        Point::new(self * q.x, self * q.y)
    }
}

impl From<(i64, i64)> for Point {
    fn from((x, y): (i64, i64)) -> Self {
        Point::new(x, y)
    }
}

/// A weight `num / den` where `den` is the determinant of the triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScaledWeight {
    pub num: i64,
    pub den: i64,
}

impl ScaledWeight {
    pub fn ceil(self) -> i64 {
        Integer::div_ceil(&self.num, &self.den)
    }

    pub fn floor(self) -> i64 {
        Integer::div_floor(&self.num, &self.den)
    }

    pub fn to_ratio(self) -> Ratio<i64> {
        Ratio::new(self.num, self.den)
    }
}

impl PartialOrd for ScaledWeight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ScaledWeight {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

/// The triangle with vertices `O`, `P1 = (a1, b1)` and `P2 = (a2, b2)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Triangle {
    p1: Point,
    p2: Point,
    det: i64,
    /// Numerator coefficients of the weight: `w(x, y) = (cx * x + cy * y) / det`.
    cx: i64,
    cy: i64,
    side: Option<i64>,
}

impl Triangle {
    pub fn new(p1: Point, p2: Point) -> Result<Self, LatticeError> {
        let det = p2.x * p1.y - p1.x * p2.y;
        if det <= 0 {
            return Err(LatticeError::BadDeterminant(det));
        }
        // Solve a1*u + b1*v = 1, a2*u + b2*v = 1 by Cramer's rule.
        let cx = p1.y - p2.y;
        let cy = p2.x - p1.x;
        let side = if p1.x == 0 && p2.y == 0 && p1.y == p2.x { Some(p2.x) } else { None };
        Ok(Triangle { p1, p2, det, cx, cy, side })
    }

    /// The isosceles right triangle with legs of length `d` along the axes.
    pub fn isosceles(d: i64) -> Result<Self, LatticeError> {
        if d < 1 {
            return Err(LatticeError::Range(format!("side {d} must be positive")));
        }
        Triangle::new(Point::new(0, d), Point::new(d, 0))
    }

    pub fn p1(&self) -> Point {
        self.p1
    }

    pub fn p2(&self) -> Point {
        self.p2
    }

    pub fn det(&self) -> i64 {
        self.det
    }

    pub fn side(&self) -> Option<i64> {
        self.side
    }

    pub fn require_isosceles(&self) -> Result<i64, LatticeError> {
        self.side.ok_or(LatticeError::NotIsosceles)
    }

    /// Coefficients `(cx, cy)` of the weight numerator.
    pub fn weight_coefficients(&self) -> (i64, i64) {
        (self.cx, self.cy)
    }

    pub fn weight_num(&self, q: Point) -> i64 {
        self.cx * q.x + self.cy * q.y
    }

    pub fn weight(&self, q: Point) -> ScaledWeight {
        ScaledWeight { num: self.weight_num(q), den: self.det }
    }

    /// Least common denominator of all weights of lattice points.
    pub fn weight_denominator(&self) -> i64 {
        self.det / self.cx.gcd(&self.cy).gcd(&self.det)
    }

    /// Numerator of the minimal nonzero weight gap, over `det`.
    pub fn weight_gap(&self) -> i64 {
        (self.p1.x - self.p2.x).gcd(&(self.p1.y - self.p2.y))
    }

    /// Interior lattice points on the edges `O P1` and `O P2`.
    pub fn edge_interior_counts(&self) -> (i64, i64) {
        (self.p1.x.gcd(&self.p1.y) - 1, self.p2.x.gcd(&self.p2.y) - 1)
    }

    /// Coordinates of `q` in the basis `P1, P2`, as numerators over `det`.
    pub fn cone_coords(&self, q: Point) -> (i64, i64) {
        let s = q.y * self.p2.x - q.x * self.p2.y;
        let t = q.x * self.p1.y - q.y * self.p1.x;
        (s, t)
    }

    pub fn in_cone(&self, q: Point) -> bool {
        let (s, t) = self.cone_coords(q);
        s >= 0 && t >= 0
    }

    pub fn in_parallelogram(&self, q: Point) -> bool {
        let (s, t) = self.cone_coords(q);
        (0..self.det).contains(&s) && (0..self.det).contains(&t)
    }

    /// The representative of `q` modulo the lattice spanned by `P1, P2`
    /// lying in the half-open fundamental parallelogram.
    pub fn residue(&self, q: Point) -> Point {
        let (s, t) = self.cone_coords(q);
        let i = Integer::div_floor(&s, &self.det);
        let j = Integer::div_floor(&t, &self.det);
        q - i * self.p1 - j * self.p2
    }

    /// Total order: weight, then x, then y.
    pub fn canonical_cmp(&self, a: &Point, b: &Point) -> Ordering {
        self.weight_num(*a)
            .cmp(&self.weight_num(*b))
            .then(a.x.cmp(&b.x))
            .then(a.y.cmp(&b.y))
    }

    pub fn sort_canonical(&self, pts: &mut [Point]) {
        pts.sort_by(|a, b| self.canonical_cmp(a, b));
    }

    /// Cone lattice points whose weight numerator is at most `cap_num`.
    pub fn cone_points_up_to(&self, cap_num: i64) -> Vec<Point> {
        if cap_num < 0 {
            return Vec::new();
        }
        // Points of weight <= k lie in k times the triangle.
        let k = Integer::div_ceil(&cap_num, &self.det).max(1);
        let xs = [0, self.p1.x, self.p2.x];
        let ys = [0, self.p1.y, self.p2.y];
        let (x0, x1) = (k * xs.iter().min().unwrap(), k * xs.iter().max().unwrap());
        let (y0, y1) = (k * ys.iter().min().unwrap(), k * ys.iter().max().unwrap());
        let mut out = Vec::new();
        for x in x0..=x1 {
            for y in y0..=y1 {
                let q = Point::new(x, y);
                if self.in_cone(q) && self.weight_num(q) <= cap_num {
                    out.push(q);
                }
            }
        }
        self.sort_canonical(&mut out);
        out
    }

    /// `T_k` (weight `< k`) or, when `closed`, `T'_k` (weight `<= k`).
    pub fn points_below(&self, k: i64, closed: bool) -> Vec<Point> {
        let cap = if closed { k * self.det } else { k * self.det - 1 };
        self.cone_points_up_to(cap)
    }

    /// Lattice points of the fundamental parallelogram, canonical order.
    pub fn parallelogram_points(&self) -> Vec<Point> {
        let mut out: Vec<Point> = self
            .cone_points_up_to(2 * self.det)
            .into_iter()
            .filter(|q| self.in_parallelogram(*q))
            .collect();
        self.sort_canonical(&mut out);
        out
    }

    pub fn check_prime(&self, p: i64) -> Result<(), LatticeError> {
        if p < 2 || !is_prime(p) {
            return Err(LatticeError::Range(format!("{p} is not prime")));
        }
        if self.det % p == 0 {
            return Err(LatticeError::PrimeDividesDet { p, det: self.det });
        }
        Ok(())
    }

    /// `P -> (pP)%` on the fundamental parallelogram, as (source, image) pairs.
    pub fn eta_permutation(&self, p: i64) -> Result<Vec<(Point, Point)>, LatticeError> {
        self.check_prime(p)?;
        let pts = self.parallelogram_points();
        let pairs: Vec<(Point, Point)> = pts.iter().map(|&q| (q, self.residue(p * q))).collect();
        let mut images: Vec<Point> = pairs.iter().map(|&(_, r)| r).collect();
        images.sort();
        images.dedup();
        if images.len() as i64 != self.det || pts.len() as i64 != self.det {
            return Err(LatticeError::Range("eta is not a bijection".into()));
        }
        Ok(pairs)
    }

    /// The standing hypothesis on `p` under which weight-minimal subsets minimise `h`.
    pub fn prime_is_large(&self, p: i64) -> bool {
        p * self.weight_gap() > 2 * self.det + self.weight_gap() && self.det % p != 0
    }
}

pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2;
    while i * i <= n {
        if n % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}
