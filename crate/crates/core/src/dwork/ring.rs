//! Coefficient rings `Z/p^M` and unramified extensions `Z_q/p^M` with their
//! Frobenius automorphism.

use std::fmt::Debug;
use std::hash::Hash;

use super::DworkError;

pub trait CoeffRing: Sync + Send {
    type Elem: Clone + PartialEq + Eq + Debug + Hash + Send + Sync;

    fn p(&self) -> u64;
    /// The precision exponent `M` of `p^M`.
    fn precision(&self) -> u32;
    /// Degree of the extension over `Z_p`.
    fn degree(&self) -> usize;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    /// Nonzero modulo `p`.
    fn is_unit(&self, a: &Self::Elem) -> bool;
    /// The arithmetic Frobenius `σ`.
    fn frob(&self, a: &Self::Elem) -> Self::Elem;
    /// Residues of the coordinates, for reporting.
    fn coords(&self, a: &Self::Elem) -> Vec<u64>;

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// An element from residues of its coordinates in the power basis.
    fn from_coords(&self, c: &[u64]) -> Self::Elem;

    /// Teichmüller lift of the residue class of `a`: `a^(q^(M-1))`.
    fn teichmuller(&self, a: &Self::Elem) -> Self::Elem {
        let mut y = a.clone();
        for _ in 0..(self.precision().saturating_sub(1) as usize) * self.degree() {
            y = self.pow(&y, self.p());
        }
        y
    }

    fn frob_pow(&self, a: &Self::Elem, j: usize) -> Self::Elem {
        (0..j % self.degree().max(1)).fold(a.clone(), |x, _| self.frob(&x))
    }
}

/// `Z / p^M` with `p^M < 2^32`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZpM {
    p: u64,
    m: u32,
    modulus: u64,
}

impl ZpM {
    pub fn new(p: u64, m: u32) -> Result<Self, DworkError> {
        let modulus = p.checked_pow(m).filter(|&q| q < (1 << 32) && m >= 1);
        let modulus = modulus.ok_or(DworkError::Precision(format!("p^M = {p}^{m} is too large")))?;
        Ok(ZpM { p, m, modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Inverse of a unit, by Euler's theorem.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a.is_multiple_of(self.p) {
            return None;
        }
        let phi = self.modulus / self.p * (self.p - 1);
        Some(self.pow(&a, phi - 1))
    }

    /// Signed representative in `(-p^M/2, p^M/2]`.
    pub fn signed(&self, a: u64) -> i64 {
        if a > self.modulus / 2 {
            a as i64 - self.modulus as i64
        } else {
            a as i64
        }
    }
}

impl CoeffRing for ZpM {
    type Elem = u64;

    fn p(&self) -> u64 {
        self.p
    }
    fn precision(&self) -> u32 {
        self.m
    }
    fn degree(&self) -> usize {
        1
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.modulus
    }
    fn from_int(&self, v: i64) -> u64 {
        v.rem_euclid(self.modulus as i64) as u64
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.modulus - a
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.modulus
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn is_unit(&self, a: &u64) -> bool {
        !a.is_multiple_of(self.p)
    }
    fn frob(&self, a: &u64) -> u64 {
        *a
    }
    fn coords(&self, a: &u64) -> Vec<u64> {
        vec![*a]
    }
    fn from_coords(&self, c: &[u64]) -> u64 {
        c.first().map_or(0, |&x| x % self.modulus)
    }
}

/// Polynomials over `F_p`, lowest degree first, no trailing zeros.
pub mod fp_poly {
    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    fn inv(a: u64, p: u64) -> u64 {
        let mut r = 1;
        let mut b = a % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    }

    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut r = trim(a.to_vec());
        let lead_inv = inv(*m.last().expect("nonzero modulus"), p);
        while r.len() >= m.len() {
            let c = r.last().unwrap() * lead_inv % p;
            let shift = r.len() - m.len();
            for (i, &mi) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - c * mi % p) % p;
            }
            r = trim(r);
        }
        r
    }

    pub fn mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        rem(&out, m, p)
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    /// `x^(p^e) mod m`.
    pub fn x_pow_p_pow(m: &[u64], p: u64, e: usize) -> Vec<u64> {
        let mut r = rem(&[0, 1], m, p);
        for _ in 0..e {
            let mut acc = vec![1u64];
            let mut base = r.clone();
            let mut k = p;
            while k > 0 {
                if k & 1 == 1 {
                    acc = mul_mod(&acc, &base, m, p);
                }
                base = mul_mod(&base, &base, m, p);
                k >>= 1;
            }
            r = acc;
        }
        r
    }

    /// Ben-Or: `m` of degree `n` is irreducible iff `gcd(m, x^(p^i) - x) = 1`
    /// for `1 <= i <= n/2`.
    pub fn is_irreducible(m: &[u64], p: u64) -> bool {
        let n = m.len() - 1;
        for i in 1..=n / 2 {
            let mut t = x_pow_p_pow(m, p, i);
            if t.len() < 2 {
                t.resize(2, 0);
            }
            t[1] = (t[1] + p - 1) % p;
            if gcd(m, &trim(t), p).len() != 1 {
                return false;
            }
        }
        true
    }

    /// The first monic irreducible polynomial of degree `n` in lexicographic
    /// order of its lower coefficients.
    pub fn first_irreducible(n: usize, p: u64) -> Vec<u64> {
        if n == 1 {
            return vec![0, 1];
        }
        let total = p.pow(n as u32);
        for code in 0..total {
            let mut m = Vec::with_capacity(n + 1);
            let mut c = code;
            for _ in 0..n {
                m.push(c % p);
                c /= p;
            }
            m.push(1);
            if m[0] != 0 && is_irreducible(&m, p) {
                return m;
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }
}

/// `Z_q / p^M = (Z/p^M)[x]/(g)` for a monic lift `g` of an irreducible
/// polynomial mod `p`.
#[derive(Clone, Debug)]
pub struct ZqM {
    base: ZpM,
    n: usize,
    modulus_poly: Vec<u64>,
    /// `σ(x)`: the root of `g` congruent to `x^p` mod `p`.
    frob_x: Vec<u64>,
}

impl ZqM {
    pub fn new(p: u64, m: u32, n: usize) -> Result<Self, DworkError> {
        let base = ZpM::new(p, m)?;
        if n == 0 {
            return Err(DworkError::Precision("extension degree must be positive".into()));
        }
        let modulus_poly = fp_poly::first_irreducible(n, p);
        let mut ring = ZqM { base, n, modulus_poly, frob_x: Vec::new() };
        ring.frob_x = ring.hensel_frobenius();
        Ok(ring)
    }

    pub fn base(&self) -> &ZpM {
        &self.base
    }

    pub fn modulus_poly(&self) -> &[u64] {
        &self.modulus_poly
    }

    pub fn x(&self) -> Vec<u64> {
        let mut v = vec![0; self.n];
        if self.n > 1 {
            v[1] = 1;
        } else {
            // In degree one, the generator is the root of `x`, i.e. zero.
            v[0] = 0;
        }
        v
    }

    fn eval_g(&self, y: &Vec<u64>) -> Vec<u64> {
        let mut acc = self.zero();
        for &c in self.modulus_poly.iter().rev() {
            acc = self.mul(&acc, y);
            acc = self.add(&acc, &self.scalar(c));
        }
        acc
    }

    fn eval_dg(&self, y: &Vec<u64>) -> Vec<u64> {
        let mut acc = self.zero();
        for (i, &c) in self.modulus_poly.iter().enumerate().skip(1).rev() {
            acc = self.mul(&acc, y);
            acc = self.add(&acc, &self.scalar(c * i as u64));
        }
        acc
    }

    pub fn scalar(&self, c: u64) -> Vec<u64> {
        let mut v = vec![0; self.n];
        v[0] = c % self.base.modulus();
        v
    }

    /// Inverse of a unit: invert mod `p` by `a^(p^n - 2)`, then Newton-lift.
    pub fn inv(&self, a: &[u64]) -> Option<Vec<u64>> {
        if !self.is_unit(&a.to_vec()) {
            return None;
        }
        let q = self.base.p().pow(self.n as u32);
        let mut z = self.pow(&a.to_vec(), q - 2);
        let two = self.scalar(2);
        for _ in 0..self.base.precision() {
            let az = self.mul(&a.to_vec(), &z);
            z = self.mul(&z, &self.sub(&two, &az));
        }
        Some(z)
    }

    fn hensel_frobenius(&self) -> Vec<u64> {
        let mut y = self.pow(&self.x(), self.base.p());
        for _ in 0..self.base.precision() + 1 {
            let dg = self.inv(&self.eval_dg(&y)).expect("separable modulus");
            y = self.sub(&y, &self.mul(&self.eval_g(&y), &dg));
        }
        y
    }

    /// `Tr_{Z_q/Z_p}` as the trace of the multiplication matrix.
    pub fn trace(&self, a: &[u64]) -> u64 {
        let b = &self.base;
        let mut basis = self.one();
        let mut acc = 0;
        for i in 0..self.n {
            let col = self.mul(&a.to_vec(), &basis);
            acc = b.add(&acc, &col[i]);
            basis = self.mul(&basis, &self.x_or_one());
        }
        acc
    }

    fn x_or_one(&self) -> Vec<u64> {
        if self.n > 1 {
            self.x()
        } else {
            self.one()
        }
    }

}

impl CoeffRing for ZqM {
    type Elem = Vec<u64>;

    fn p(&self) -> u64 {
        self.base.p()
    }
    fn precision(&self) -> u32 {
        self.base.precision()
    }
    fn degree(&self) -> usize {
        self.n
    }
    fn zero(&self) -> Vec<u64> {
        vec![0; self.n]
    }
    fn one(&self) -> Vec<u64> {
        self.scalar(1)
    }
    fn from_int(&self, v: i64) -> Vec<u64> {
        let mut e = self.zero();
        e[0] = self.base.from_int(v);
        e
    }
    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| self.base.add(x, y)).collect()
    }
    fn sub(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| self.base.sub(x, y)).collect()
    }
    fn neg(&self, a: &Vec<u64>) -> Vec<u64> {
        a.iter().map(|x| self.base.neg(x)).collect()
    }
    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let n = self.n;
        let md = self.base.modulus();
        let mut prod = vec![0u64; 2 * n - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % md;
            }
        }
        // Reduce with the monic modulus.
        for k in (n..2 * n - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for (i, &g) in self.modulus_poly.iter().take(n).enumerate() {
                let t = c * g % md;
                prod[k - n + i] = (prod[k - n + i] + md - t) % md;
            }
        }
        prod.truncate(n);
        prod
    }
    fn is_zero(&self, a: &Vec<u64>) -> bool {
        a.iter().all(|&x| x == 0)
    }
    fn is_unit(&self, a: &Vec<u64>) -> bool {
        a.iter().any(|&x| x % self.base.p() != 0)
    }
    fn frob(&self, a: &Vec<u64>) -> Vec<u64> {
        let mut acc = self.zero();
        for &c in a.iter().rev() {
            acc = self.mul(&acc, &self.frob_x);
            acc = self.add(&acc, &self.scalar(c));
        }
        acc
    }
    fn coords(&self, a: &Vec<u64>) -> Vec<u64> {
        a.clone()
    }
    fn from_coords(&self, c: &[u64]) -> Vec<u64> {
        let mut v: Vec<u64> = c.iter().map(|&x| x % self.base.modulus()).collect();
        v.resize(self.n, 0);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zpm_basics() {
        let r = ZpM::new(7, 2).unwrap();
        assert_eq!(r.modulus(), 49);
        assert_eq!(r.mul(&r.inv(3).unwrap(), &3), 1);
        assert_eq!(r.inv(14), None);
        assert_eq!(r.from_int(-1), 48);
        assert_eq!(r.signed(48), -1);
        assert!(ZpM::new(7, 40).is_err());
    }

    #[test]
    fn irreducibility() {
        assert!(fp_poly::is_irreducible(&[1, 0, 1], 7));
        assert!(!fp_poly::is_irreducible(&[1, 0, 1], 5));
        let g = fp_poly::first_irreducible(3, 2);
        assert!(fp_poly::is_irreducible(&g, 2));
    }

    #[test]
    fn frobenius_is_an_automorphism_of_order_n() {
        for (p, n) in [(7u64, 2usize), (3, 3), (5, 2)] {
            let r = ZqM::new(p, 3, n).unwrap();
            let a = r.from_coords(&[2, 5, 1]);
            let b = r.from_coords(&[4, 1, 3]);
            assert_eq!(r.frob(&r.mul(&a, &b)), r.mul(&r.frob(&a), &r.frob(&b)));
            assert_eq!(r.frob_pow(&a, n), a);
            let mut x = a.clone();
            for _ in 0..n {
                x = r.frob(&x);
            }
            assert_eq!(x, a);
            // σ(a) = a^p mod p.
            let fa = r.frob(&a);
            let ap = r.pow(&a, p);
            assert!(fa.iter().zip(&ap).all(|(u, v)| (u + p * p * p - v) % p == 0));
        }
    }

    #[test]
    fn teichmuller_is_fixed_by_q_power() {
        let r = ZqM::new(7, 3, 2).unwrap();
        let a = r.from_coords(&[3, 2]);
        let t = r.teichmuller(&a);
        assert_eq!(r.pow(&t, 49), t);
        assert!(t.iter().zip(&a).all(|(u, v)| (u + 343 - v) % 7 == 0));
    }

    #[test]
    fn trace_of_scalars() {
        let r = ZqM::new(5, 2, 3).unwrap();
        assert_eq!(r.trace(&r.scalar(4)), 12);
        let a = r.from_coords(&[1, 2, 3]);
        assert_eq!(r.trace(&r.frob(&a)), r.trace(&a));
    }
}
