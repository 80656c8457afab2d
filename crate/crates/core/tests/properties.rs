//! Property tests over random triangles, primes and multisets.

use proptest::prelude::*;
use tpoly_core::dwork::{TruncSeries, ZpM};
use tpoly_core::hodge::{assignment_oracle, greedy_minimal_permutation, Frobenius};
use tpoly_core::lattice::iso::mirror;
use tpoly_core::lattice::{is_prime, Point, Triangle};
use tpoly_core::polygon::{PolygonHull, Q64};

const CONFIGS: [(i64, i64); 3] = [(3, 7), (5, 11), (7, 17)];

/// A positively oriented triangle `(a1,b1), (a2,b2)`, with `a2*b1 - a1*b2` below 40.
fn triangle() -> impl Strategy<Value = Triangle> {
    (0i64..6, 1i64..6, 1i64..6, 0i64..6)
        .prop_filter_map("degenerate", |(a1, b1, a2, b2)| {
            let det = a2 * b1 - a1 * b2;
            (det > 0 && det < 40).then(|| Triangle::new(Point::new(a1, b1), Point::new(a2, b2)).ok()).flatten()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn greedy_matches_oracle(cfg in 0usize..3, picks in prop::collection::vec(0usize..1000, 1..=12)) {
        let (d, p) = CONFIGS[cfg];
        let tri = Triangle::isosceles(d).unwrap();
        let frob = Frobenius::new(&tri, p);
        let pool = tri.cone_points_up_to(2 * tri.det());
        let s: Vec<Point> = picks.iter().map(|&i| pool[i % pool.len()]).collect();
        let g = greedy_minimal_permutation(&frob, &s).score(&frob).h;
        let o = assignment_oracle(&frob, &s, &s).unwrap().score(&frob).h;
        prop_assert_eq!(g, o);
    }

    #[test]
    fn weight_is_linear_on_the_cone(tri in triangle(), a in (0i64..5, 0i64..5), b in (0i64..5, 0i64..5), k in 1i64..5) {
        let (u, v) = (Point::new(a.0, a.1), Point::new(b.0, b.1));
        prop_assume!(tri.in_cone(u) && tri.in_cone(v));
        prop_assert_eq!(tri.weight_num(u + v), tri.weight_num(u) + tri.weight_num(v));
        prop_assert_eq!(tri.weight_num(k * u), k * tri.weight_num(u));
        prop_assert_eq!(tri.weight_num(tri.p1()), tri.det());
        prop_assert_eq!(tri.weight_num(tri.p2()), tri.det());
    }

    #[test]
    fn weights_are_multiples_of_the_gap(tri in triangle()) {
        let gap = tri.weight_gap();
        for q in tri.points_below(2, true) {
            prop_assert_eq!(tri.weight_num(q) % gap, 0);
        }
    }

    #[test]
    fn eta_is_a_bijection(tri in triangle(), seed in any::<u64>()) {
        let primes: Vec<i64> = (2i64..120).filter(|&p| is_prime(p) && tri.det() % p != 0).collect();
        let p = primes[(seed % primes.len() as u64) as usize];
        let pairs = tri.eta_permutation(p).unwrap();
        prop_assert_eq!(pairs.len() as i64, tri.det());
        for (q, r) in pairs {
            prop_assert!(tri.in_parallelogram(r));
            prop_assert_eq!(tri.residue(p * q), r);
        }
    }

    #[test]
    fn mirror_is_an_involution(d in 2i64..40, x in -5i64..45, y in -5i64..45) {
        let q = Point::new(x, y);
        prop_assert_eq!(mirror(d, mirror(d, q)), q);
        let v = q - mirror(d, q);
        prop_assert_eq!(v.x, v.y);
    }

    #[test]
    fn lower_hull_is_convex_and_below(ys in prop::collection::vec(-50i64..50, 2..30)) {
        let pts: Vec<(i64, Q64, bool)> = ys.iter().enumerate().map(|(i, &y)| (i as i64, Q64::from_integer(y), true)).collect();
        let hull = PolygonHull::lower_hull(&pts);
        let slopes = hull.slopes();
        prop_assert!(slopes.windows(2).all(|w| w[0] < w[1]));
        for &(x, y, _) in &pts {
            prop_assert!(hull.value_at(x).unwrap() <= y);
        }
    }

    #[test]
    fn series_ring_laws(a in prop::collection::vec(0u64..49, 6), b in prop::collection::vec(0u64..49, 6), c in prop::collection::vec(0u64..49, 6)) {
        let r = ZpM::new(7, 2).unwrap();
        let s = |v: &Vec<u64>| TruncSeries { coeffs: v.clone() };
        let (a, b, c) = (s(&a), s(&b), s(&c));
        prop_assert_eq!(a.mul(&r, &b), b.mul(&r, &a));
        prop_assert_eq!(a.mul(&r, &b).mul(&r, &c), a.mul(&r, &b.mul(&r, &c)));
        prop_assert_eq!(a.mul(&r, &b.add(&r, &c)), a.mul(&r, &b).add(&r, &a.mul(&r, &c)));
    }
}
