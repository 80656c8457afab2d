//! T-adic side: truncated series over p-adic rings, the Artin–Hasse
//! expansion of `E_f`, the Dwork matrix and its characteristic series, and
//! the exponential sums it is checked against.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{LatticeError, Point, Triangle};

pub mod artin_hasse;
pub mod ef;
pub mod expsum;
pub mod matrix;
pub mod ring;
pub mod series;

pub use artin_hasse::{artin_hasse, pi_of_t};
pub use ef::{expand_ef, EfExpansion};
pub use expsum::{exp_sum_oracle, TraceComparison};
pub use matrix::{char_series, det_t1, newton_polygon_c, truncation_cap, CharSeries, DworkMatrix};
pub use ring::{CoeffRing, ZpM, ZqM};
pub use series::{TruncSeries, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DworkError {
    #[error("precision: {0}")]
    Precision(String),
    #[error("a rational coefficient is not p-integral")]
    NotIntegral,
    #[error("polynomial support does not have the triangle as its hull: {0}")]
    HullMismatch(String),
    #[error("torus of size {0} exceeds the enumeration limit")]
    TorusTooLarge(u64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A polynomial over `F_q`, each coefficient given by its coordinates in the
/// power basis of the ring's residue field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolyF {
    pub p: u64,
    pub n: usize,
    #[serde(serialize_with = "coefficient_pairs")]
    pub coeffs: BTreeMap<Point, Vec<u64>>,
}

/// `[[[x, y], coords], ...]`, since JSON object keys must be strings.
fn coefficient_pairs<S: serde::Serializer>(m: &BTreeMap<Point, Vec<u64>>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(m.iter())
}

impl PolyF {
    pub fn new(p: u64, n: usize) -> Self {
        PolyF { p, n, coeffs: BTreeMap::new() }
    }

    pub fn with(mut self, q: Point, c: &[u64]) -> Self {
        self.set(q, c);
        self
    }

    pub fn set(&mut self, q: Point, c: &[u64]) {
        let mut v: Vec<u64> = c.iter().map(|&x| x % self.p).collect();
        v.resize(self.n, 0);
        if v.iter().all(|&x| x == 0) {
            self.coeffs.remove(&q);
        } else {
            self.coeffs.insert(q, v);
        }
    }

    pub fn support(&self) -> Vec<Point> {
        self.coeffs.keys().copied().collect()
    }

    /// Support inside `T'_1` with both far vertices present.
    pub fn check_hull(&self, tri: &Triangle) -> Result<(), DworkError> {
        for &q in self.coeffs.keys() {
            if !tri.in_cone(q) || tri.weight_num(q) > tri.det() {
                return Err(DworkError::HullMismatch(format!("monomial {q} lies outside the triangle")));
            }
        }
        for v in [tri.p1(), tri.p2()] {
            if !self.coeffs.contains_key(&v) {
                return Err(DworkError::HullMismatch(format!("vertex {v} has zero coefficient")));
            }
        }
        Ok(())
    }

    /// Teichmüller lifts of the coefficients in `ring`.
    pub fn lift<R: CoeffRing>(&self, ring: &R) -> BTreeMap<Point, R::Elem> {
        self.coeffs.iter().map(|(&q, c)| (q, ring.teichmuller(&ring.from_coords(c)))).collect()
    }

    /// Uniform random polynomial over `F_p` supported on `T'_1` minus the
    /// origin, with nonzero vertex coefficients.  A constant term would only
    /// rescale every exponential sum, and leaving it out keeps `e_O = 1`.
    pub fn random_prime_field(tri: &Triangle, p: u64, rng: &mut ChaCha8Rng) -> Self {
        let mut f = PolyF::new(p, 1);
        for q in tri.points_below(1, true).into_iter().filter(|&q| q != Point::ORIGIN) {
            let vertex = q == tri.p1() || q == tri.p2();
            let c = if vertex { rng.gen_range(1..p) } else { rng.gen_range(0..p) };
            f.set(q, &[c]);
        }
        f
    }

    /// A deterministic family of random polynomials indexed by `seed`.
    pub fn random_family(tri: &Triangle, p: u64, seed: u64, count: usize) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| PolyF::random_prime_field(tri, p, &mut rng)).collect()
    }
}
