//! Direct evaluation of `S*_f(k, T) = Σ_{x ∈ (F_{q^k}^×)^2} (1+T)^{Tr f̂(x̂)}`
//! and the comparison with `(q^k - 1)^2 Tr(ψ^{nk})`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::ef::expand_ef;
use super::matrix::{truncation_cap, DworkMatrix};
use super::ring::{CoeffRing, ZpM, ZqM};
use super::series::TruncSeries;
use super::{DworkError, PolyF};
use crate::lattice::{Point, Triangle};

/// Largest torus enumerated directly.
pub const TORUS_LIMIT: u64 = 4_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceComparison {
    pub k: u32,
    pub p: u64,
    pub m: u32,
    pub n_t: usize,
    /// `S*_f(k, T)` mod `(p^M, T^N)`.
    pub exp_sum: Vec<u64>,
    /// `(q^k - 1)^2 Tr(ψ^{nk})` mod `(p^M, T^N)`.
    pub trace_side: Vec<u64>,
    pub agree: bool,
}

fn ilog(p: u64, x: u64) -> u32 {
    let mut e = 0;
    let mut v = p;
    while v <= x {
        e += 1;
        v *= p;
    }
    e
}

/// All nonzero residue vectors of length `len` over `F_p`.
fn nonzero_residues(p: u64, len: usize) -> Vec<Vec<u64>> {
    let total = p.pow(len as u32);
    (1..total)
        .map(|mut c| {
            (0..len)
                .map(|_| {
                    let r = c % p;
                    c /= p;
                    r
                })
                .collect()
        })
        .collect()
}

/// A root in `big`'s residue field of the defining polynomial of `F_q`.
fn embed_generator(big: &ZqM, small_poly: &[u64], p: u64) -> Vec<u64> {
    for c in nonzero_residues(p, big.degree()) {
        let y = big.from_coords(&c);
        let mut acc = big.zero();
        for &g in small_poly.iter().rev() {
            acc = big.mul(&acc, &y);
            acc = big.add(&acc, &big.scalar(g));
        }
        if acc.iter().all(|&v| v % p == 0) {
            return y;
        }
    }
    unreachable!("F_q embeds in F_(q^k)")
}

/// `S*_f(k, T)` by enumerating the torus, with no hull condition on `f`.
pub fn exp_sum_direct(tri: &Triangle, f: &PolyF, k: u32, m: u32, n_t: usize) -> Result<Vec<u64>, DworkError> {
    let _ = tri;
    let p = f.p;
    let deg = f.n * k as usize;
    let qk = p.pow(deg as u32);
    if (qk - 1) * (qk - 1) > TORUS_LIMIT {
        return Err(DworkError::TorusTooLarge((qk - 1) * (qk - 1)));
    }
    // (1+T)^a mod (p^M, T^N) depends on a mod p^(M + floor(log_p(N-1))).
    let m_big = m + ilog(p, n_t.saturating_sub(1) as u64);
    let big = ZqM::new(p, m_big, deg)?;
    let gen = if f.n > 1 { Some(embed_generator(&big, ZqM::new(p, 1, f.n)?.modulus_poly(), p)) } else { None };
    let embed = |c: &[u64]| -> Vec<u64> {
        match &gen {
            None => big.scalar(c[0]),
            Some(y) => {
                let mut acc = big.zero();
                for &ci in c.iter().rev() {
                    acc = big.mul(&acc, y);
                    acc = big.add(&acc, &big.scalar(ci));
                }
                acc
            }
        }
    };
    let coeffs: Vec<(Point, Vec<u64>)> =
        f.coeffs.iter().map(|(&q, c)| (q, big.teichmuller(&embed(c)))).collect();
    let max_exp = coeffs.iter().map(|(q, _)| q.x.max(q.y)).max().unwrap_or(0) as usize;

    let torus: Vec<Vec<Vec<u64>>> = nonzero_residues(p, deg)
        .iter()
        .map(|c| {
            let t = big.teichmuller(&big.from_coords(c));
            let mut pw = vec![big.one()];
            for i in 1..=max_exp {
                let next = big.mul(&pw[i - 1], &t);
                pw.push(next);
            }
            pw
        })
        .collect();
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for x1 in &torus {
        for x2 in &torus {
            let mut v = big.zero();
            for (q, a) in &coeffs {
                let mono = big.mul(&x1[q.x as usize], &x2[q.y as usize]);
                v = big.add(&v, &big.mul(a, &mono));
            }
            *counts.entry(big.trace(&v)).or_default() += 1;
        }
    }
    let small = ZpM::new(p, m)?;
    let md = BigUint::from(small.modulus());
    let mut out = vec![0u64; n_t];
    for (&a, &cnt) in &counts {
        let mut binom = BigUint::from(1u32);
        for j in 0..n_t {
            let term = (&binom % &md).to_u64().unwrap();
            out[j] = small.add(&out[j], &small.mul(&term, &small.from_int(cnt as i64)));
            if (j as u64) >= a {
                break;
            }
            binom = binom * BigUint::from(a - j as u64) / BigUint::from(j as u64 + 1);
        }
    }
    Ok(out)
}

/// Coordinates of `(q^k - 1)^2 Tr(ψ^{nk})` on `Z_p`; errors if the trace is
/// not in `Z_p[[T]]`.
fn trace_side<R: CoeffRing>(
    tri: &Triangle,
    f: &PolyF,
    ring: &R,
    k: u32,
    n_t: usize,
) -> Result<Vec<u64>, DworkError> {
    let p = f.p;
    let ex = expand_ef(tri, &f.lift(ring), ring, n_t, n_t as i64)?;
    let mat = DworkMatrix::build(tri, p, &ex, ring, truncation_cap(tri, p, n_t))?;
    let psi_n = mat.psi_power(ring);
    let mut power = psi_n.clone();
    for _ in 1..k {
        power = power.mul(ring, &psi_n);
    }
    let tr: TruncSeries<R::Elem> = power.trace(ring);
    let qk = p.pow(f.n as u32 * k) as i64 - 1;
    let factor = ring.from_int(qk);
    let factor = ring.mul(&factor, &factor);
    let scaled = tr.scale(ring, &factor);
    let mut out = Vec::with_capacity(n_t);
    for c in &scaled.coeffs {
        let coords = ring.coords(c);
        if coords.iter().skip(1).any(|&x| x != 0) {
            return Err(DworkError::Precision("trace left Z_p".into()));
        }
        out.push(coords[0]);
    }
    Ok(out)
}

/// Both sides of the trace formula modulo `(p^M, T^N)`.
pub fn exp_sum_oracle(tri: &Triangle, f: &PolyF, k: u32, m: u32, n_t: usize) -> Result<TraceComparison, DworkError> {
    let exp_sum = exp_sum_direct(tri, f, k, m, n_t)?;
    let trace = if f.n == 1 {
        trace_side(tri, f, &ZpM::new(f.p, m)?, k, n_t)?
    } else {
        trace_side(tri, f, &ZqM::new(f.p, m, f.n)?, k, n_t)?
    };
    Ok(TraceComparison { k, p: f.p, m, n_t, agree: exp_sum == trace, exp_sum, trace_side: trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_polynomial() {
        let tri = Triangle::isosceles(2).unwrap();
        let f = PolyF::new(7, 1);
        let s = exp_sum_direct(&tri, &f, 1, 2, 6).unwrap();
        assert_eq!(s, vec![36, 0, 0, 0, 0, 0]);
        let t = trace_side(&tri, &f, &ZpM::new(7, 2).unwrap(), 1, 6).unwrap();
        assert_eq!(t, s);
    }

    #[test]
    fn trace_formula_d2_p7() {
        let tri = Triangle::isosceles(2).unwrap();
        for f in PolyF::random_family(&tri, 7, 1, 2) {
            for k in [1u32, 2] {
                let c = exp_sum_oracle(&tri, &f, k, 2, 8).unwrap();
                assert!(c.agree, "k={k}: {:?} vs {:?}", c.exp_sum, c.trace_side);
            }
        }
    }

    #[test]
    fn trace_formula_over_f9() {
        let tri = Triangle::isosceles(1).unwrap();
        let f = PolyF::new(3, 2).with(Point::new(1, 0), &[1, 1]).with(Point::new(0, 1), &[2, 0]);
        let c = exp_sum_oracle(&tri, &f, 1, 2, 5).unwrap();
        assert!(c.agree, "{:?} vs {:?}", c.exp_sum, c.trace_side);
    }

    #[test]
    fn torus_limit() {
        let tri = Triangle::isosceles(2).unwrap();
        let f = PolyF::new(7, 1);
        assert!(matches!(exp_sum_direct(&tri, &f, 4, 2, 4), Err(DworkError::TorusTooLarge(_))));
    }
}
