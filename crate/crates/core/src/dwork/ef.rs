//! Expansion of `E_f(x) = ∏_P E(â_P π x^P) = Σ_Q e_Q(T) x^Q`.

use std::collections::{BTreeMap, HashMap};

use super::artin_hasse::{artin_hasse, pi_of_t};
use super::ring::{CoeffRing, ZpM};
use super::series::{TruncSeries, Valuation};
use super::{DworkError, PolyF};
use crate::lattice::{Point, Triangle};

/// Coefficients `e_Q mod T^N` for every cone point `Q` with `w(Q) < w_cap`.
#[derive(Clone, Debug)]
pub struct EfExpansion<E> {
    pub n: usize,
    pub w_cap: i64,
    pub points: Vec<Point>,
    index: HashMap<Point, usize>,
    pub e: Vec<TruncSeries<E>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundViolation {
    pub point: Point,
    pub valuation: Valuation,
    pub bound: i64,
}

impl<E: Clone + PartialEq> EfExpansion<E> {
    pub fn get(&self, q: Point) -> Option<&TruncSeries<E>> {
        self.index.get(&q).map(|&i| &self.e[i])
    }

    /// Every emitted `Q` with `v_T(e_Q) < ceil(w(Q))`.
    pub fn bound_violations<R: CoeffRing<Elem = E>>(&self, ring: &R, tri: &Triangle) -> Vec<BoundViolation> {
        let mut out = Vec::new();
        for (q, s) in self.points.iter().zip(&self.e) {
            let bound = tri.weight(*q).ceil();
            let v = s.valuation(ring);
            if let Valuation::Finite(x) = v {
                if x < bound {
                    out.push(BoundViolation { point: *q, valuation: v, bound });
                }
            }
        }
        out
    }
}

/// Series with coefficients in `Z_p` mapped into `ring`.
fn embed<R: CoeffRing>(ring: &R, s: &TruncSeries<u64>) -> TruncSeries<R::Elem> {
    TruncSeries { coeffs: s.coeffs.iter().map(|&c| ring.from_int(c as i64)).collect() }
}

/// Expand `E_f` for the lifted coefficients `f_hat` modulo `T^n`, keeping
/// all cone points of weight below `w_cap`.
pub fn expand_ef<R: CoeffRing>(
    tri: &Triangle,
    f_hat: &BTreeMap<Point, R::Elem>,
    ring: &R,
    n: usize,
    w_cap: i64,
) -> Result<EfExpansion<R::Elem>, DworkError> {
    let base = ZpM::new(ring.p(), ring.precision())?;
    let ah = artin_hasse(&base, n)?;
    let pi = embed(ring, &pi_of_t(&base, n)?);
    let mut pi_pow = vec![TruncSeries::one(ring, n)];
    for j in 1..n {
        let next = pi_pow[j - 1].mul(ring, &pi);
        pi_pow.push(next);
    }

    let points = tri.cone_points_up_to(w_cap * tri.det() - 1);
    let index: HashMap<Point, usize> = points.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let mut e: Vec<TruncSeries<R::Elem>> = vec![TruncSeries::zero(ring, n); points.len()];
    e[index[&Point::ORIGIN]] = TruncSeries::one(ring, n);

    for (&m, a) in f_hat {
        if ring.is_zero(a) {
            continue;
        }
        // E(a π x^m) = Σ_j c_j a^j π^j x^(j m).
        let mut factor = Vec::with_capacity(n);
        let mut apow = ring.one();
        for j in 0..n {
            let c = ring.from_int(ah.coeffs[j] as i64);
            factor.push(pi_pow[j].scale(ring, &ring.mul(&c, &apow)));
            apow = ring.mul(&apow, a);
        }
        let mut next: Vec<TruncSeries<R::Elem>> = vec![TruncSeries::zero(ring, n); points.len()];
        if m == Point::ORIGIN {
            let total = factor.iter().fold(TruncSeries::zero(ring, n), |acc, s| acc.add(ring, s));
            for (i, s) in e.iter().enumerate() {
                next[i] = s.mul(ring, &total);
            }
        } else {
            for (i, s) in e.iter().enumerate() {
                let Some(v) = s.first_nonzero(ring) else { continue };
                for (j, fj) in factor.iter().enumerate() {
                    if v + j >= n {
                        break;
                    }
                    let target = points[i] + (j as i64) * m;
                    let Some(&t) = index.get(&target) else { break };
                    let prod = s.mul(ring, fj);
                    next[t].add_assign(ring, &prod);
                }
            }
        }
        e = next;
    }
    Ok(EfExpansion { n, w_cap, points, index, e })
}

/// Convenience wrapper: lift `f` and expand.
pub fn expand_poly<R: CoeffRing>(
    tri: &Triangle,
    f: &PolyF,
    ring: &R,
    n: usize,
    w_cap: i64,
) -> Result<EfExpansion<R::Elem>, DworkError> {
    f.check_hull(tri)?;
    expand_ef(tri, &f.lift(ring), ring, n, w_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dwork::artin_hasse::artin_hasse;

    #[test]
    fn single_monomial_lies_on_its_ray() {
        let tri = Triangle::isosceles(2).unwrap();
        let r = ZpM::new(7, 2).unwrap();
        let q = Point::new(2, 0);
        let mut f_hat = BTreeMap::new();
        f_hat.insert(q, 1u64);
        let ex = expand_ef(&tri, &f_hat, &r, 10, 4).unwrap();
        assert_eq!(ex.get(Point::ORIGIN).unwrap(), &TruncSeries::one(&r, 10));
        let ah = artin_hasse(&r, 10).unwrap();
        let pi = pi_of_t(&r, 10).unwrap();
        let mut pik = TruncSeries::one(&r, 10);
        for k in 0..4 {
            let want = pik.scale(&r, &ah.coeffs[k]);
            assert_eq!(ex.get(Point::new(2 * k as i64, 0)).unwrap(), &want);
            pik = pik.mul(&r, &pi);
        }
        assert!(ex.get(Point::new(1, 0)).unwrap().is_zero(&r));
        assert!(ex.get(Point::new(0, 2)).unwrap().is_zero(&r));
    }

    #[test]
    fn valuation_bound_on_random_polynomials() {
        for (d, p) in [(3i64, 7u64), (2, 7)] {
            let tri = Triangle::isosceles(d).unwrap();
            let r = ZpM::new(p, 2).unwrap();
            for f in PolyF::random_family(&tri, p, 11, 2) {
                let ex = expand_poly(&tri, &f, &r, 16, 18).unwrap();
                assert_eq!(ex.get(Point::ORIGIN).unwrap(), &TruncSeries::one(&r, 16));
                assert!(ex.bound_violations(&r, &tri).is_empty());
            }
        }
    }

    #[test]
    fn hull_is_checked() {
        let tri = Triangle::isosceles(3).unwrap();
        let f = PolyF::new(7, 1).with(Point::new(3, 0), &[1]);
        assert!(matches!(f.check_hull(&tri), Err(DworkError::HullMismatch(_))));
        let g = f.clone().with(Point::new(0, 3), &[2]).with(Point::new(2, 2), &[1]);
        assert!(g.check_hull(&tri).is_err());
    }
}
