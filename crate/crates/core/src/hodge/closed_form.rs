//! Closed-form vertex data `(x_k, h(T_k))`, `(x'_k, h(T'_k))` and the slope
//! bands they imply.

use num_rational::Ratio;
use serde::Serialize;

use super::{h_min, Frobenius};
use crate::polygon::{qser, Q64};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexFormulas {
    pub k: i64,
    pub x_k: i64,
    pub x_prime_k: i64,
    /// `h(T_k)` as displayed in the statement of the lemma (no `-1` in the bracket).
    #[serde(serialize_with = "qser::one")]
    pub h_statement: Q64,
    /// `h(T_k)` as obtained at the end of its derivation (with the `-1`).
    #[serde(serialize_with = "qser::one")]
    pub h_derived: Q64,
    /// The isosceles specialisation `(p-1)(k-1)k(k+1)d^2/3 + k Σ floor(p w(P))`.
    #[serde(serialize_with = "qser::opt")]
    pub h_isosceles: Option<Q64>,
    /// `h(T'_k) = h(T_k) + (x'_k - x_k) k (p-1)`, built on `h_derived`.
    #[serde(serialize_with = "qser::one")]
    pub h_prime_derived: Q64,
}

/// Formula values at level `k`, given `h(T_1)` and `x_1 = |T_1|`.
pub fn closed_form_vertices(frob: &Frobenius<'_>, k: i64, h_t1: i64) -> VertexFormulas {
    let tri = frob.tri;
    let p = frob.p;
    let det = tri.det();
    let x1 = tri.points_below(1, false).len() as i64;
    let (l1, l2) = tri.edge_interior_counts();
    let x_k = k * x1 + k * (k - 1) / 2 * det;
    let x_prime_k = x_k + k * tri.weight_gap() + 1;
    let half_l = Ratio::new(l1 + l2, 2);
    let base = Q64::from_integer(k * (h_t1 + (p - 1) * (k - 1) * x1));
    let mut sum_stmt = Q64::from_integer(0);
    let mut sum_der = Q64::from_integer(0);
    for i in 0..=(k - 2).max(-1) {
        let a = Q64::from_integer(det * (i + 1)) - half_l;
        sum_stmt += a * (i + 1);
        sum_der += (a - 1) * (i + 1);
    }
    let h_statement = Q64::from_integer(p - 1) * sum_stmt + base;
    let h_derived = Q64::from_integer(p - 1) * sum_der + base;
    let h_isosceles = tri.side().map(|d| {
        let floor_sum: i64 = tri
            .points_below(1, false)
            .iter()
            .map(|&q| (p * (q.x + q.y)).div_euclid(d))
            .sum();
        Ratio::new((p - 1) * (k - 1) * k * (k + 1) * d * d, 3) + Q64::from_integer(k * floor_sum)
    });
    let h_prime_derived = h_derived + Q64::from_integer((x_prime_k - x_k) * k * (p - 1));
    VertexFormulas { k, x_k, x_prime_k, h_statement, h_derived, h_isosceles, h_prime_derived }
}

/// `h2(T_k) == k h2(T_1)`.
pub fn h2_linearity_check(frob: &Frobenius<'_>, k: i64) -> bool {
    let h2 = |k: i64| {
        let t = frob.tri.points_below(k, false);
        Q64::from_integer(h_min(frob, &t)) - super::h1_of(frob, &t)
    };
    h2(k) == h2(1) * k
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SlopeBand {
    /// Indices `first..=last` all carry exactly `value`.
    Exact {
        first: i64,
        last: i64,
        #[serde(serialize_with = "qser::one")]
        value: Q64,
    },
    /// Indices `first..=last` carry slopes strictly between `lo` and `hi`.
    Open {
        first: i64,
        last: i64,
        #[serde(serialize_with = "qser::one")]
        lo: Q64,
        #[serde(serialize_with = "qser::one")]
        hi: Q64,
    },
}

impl SlopeBand {
    pub fn len(&self) -> i64 {
        match self {
            SlopeBand::Exact { first, last, .. } | SlopeBand::Open { first, last, .. } => last - first + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() <= 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeBandReport {
    pub d: i64,
    pub p: i64,
    pub m: u32,
    /// The interleaved exact/open bands for `i = 0 .. p^{m-1} - 1`.
    pub bands: Vec<SlopeBand>,
    /// The slope-1 run `x_{P}+1 ..= x'_{P}-2`, which lies past the prefix.
    pub tail: SlopeBand,
    pub prefix_len: i64,
    /// `(p^{2(m-1)} d^2 + p^{m-1} d) / 2`.
    pub expected_prefix_len: i64,
    /// `d >= 24 (2 p0^2 + p0)`.
    pub large_d_hypothesis: bool,
}

pub fn gnp_slope_bands(d: i64, p: i64, m: u32) -> SlopeBandReport {
    let big_p = p.pow(m.saturating_sub(1));
    let x = |k: i64| (k * d + 1) * k * d / 2;
    let xp = |k: i64| x(k) + k * d + 1;
    let mut bands = Vec::new();
    for i in 0..big_p {
        bands.push(SlopeBand::Exact { first: x(i) + 1, last: xp(i), value: Ratio::new(i, big_p) });
        bands.push(SlopeBand::Open {
            first: xp(i) + 1,
            last: x(i + 1),
            lo: Ratio::new(i, big_p),
            hi: Ratio::new(i + 1, big_p),
        });
    }
    let tail = SlopeBand::Exact { first: x(big_p) + 1, last: xp(big_p) - 2, value: Q64::from_integer(1) };
    let prefix_len = bands.iter().map(SlopeBand::len).sum();
    let p0 = p % d;
    SlopeBandReport {
        d,
        p,
        m,
        bands,
        tail,
        prefix_len,
        expected_prefix_len: (big_p * big_p * d * d + big_p * d) / 2,
        large_d_hypothesis: d >= 24 * (2 * p0 * p0 + p0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hodge::assignment_oracle;
    use crate::lattice::Triangle;

    #[test]
    fn level_one_at_7_17() {
        let tri = Triangle::isosceles(7).unwrap();
        let frob = Frobenius::new(&tri, 17);
        let v = closed_form_vertices(&frob, 1, 259);
        assert_eq!((v.x_k, v.x_prime_k), (28, 36));
        assert_eq!(v.h_derived, Q64::from_integer(259));
        assert_eq!(v.h_isosceles, Some(Q64::from_integer(259)));
        assert_eq!(v.h_prime_derived, Q64::from_integer(259 + 128));
    }

    #[test]
    fn derived_form_matches_oracle_and_statement_does_not() {
        for (d, p) in [(3, 7), (5, 11), (7, 17)] {
            let tri = Triangle::isosceles(d).unwrap();
            let frob = Frobenius::new(&tri, p);
            let t1 = tri.points_below(1, false);
            let h1 = assignment_oracle(&frob, &t1, &t1).unwrap().score(&frob).h;
            let t2 = tri.points_below(2, false);
            let h2 = assignment_oracle(&frob, &t2, &t2).unwrap().score(&frob).h;
            let v = closed_form_vertices(&frob, 2, h1);
            assert_eq!(v.x_k, t2.len() as i64);
            assert_eq!(v.h_derived, Q64::from_integer(h2));
            assert_eq!(v.h_isosceles, Some(Q64::from_integer(h2)));
            assert_eq!(v.h_statement - v.h_derived, Q64::from_integer(p - 1));
        }
    }

    #[test]
    fn h2_linear_at_7_17() {
        let tri = Triangle::isosceles(7).unwrap();
        let frob = Frobenius::new(&tri, 17);
        assert!(h2_linearity_check(&frob, 1));
        assert!(h2_linearity_check(&frob, 2));
    }

    #[test]
    fn bands_for_conductor_p() {
        let r = gnp_slope_bands(7, 17, 1);
        assert_eq!(r.bands.len(), 2);
        assert_eq!(r.bands[0], SlopeBand::Exact { first: 1, last: 1, value: Q64::from_integer(0) });
        assert_eq!(r.prefix_len, 28);
        assert_eq!(r.prefix_len, r.expected_prefix_len);
        let r = gnp_slope_bands(7, 17, 2);
        assert_eq!(r.prefix_len, r.expected_prefix_len);
        assert_eq!(r.bands[1].len(), 28 - 1);
    }
}
