//! Power series in `T` truncated modulo `T^N`.

use serde::Serialize;

use super::ring::CoeffRing;

/// The T-adic valuation of a truncated series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Valuation {
    Finite(i64),
    /// Every coefficient below `T^N` vanishes.
    AtLeast(i64),
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }

    /// A lower bound valid in both cases.
    pub fn lower_bound(self) -> i64 {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => v,
        }
    }

    pub fn describe(self) -> String {
        match self {
            Valuation::Finite(v) => v.to_string(),
            Valuation::AtLeast(n) => format!(">={n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncSeries<E> {
    pub coeffs: Vec<E>,
}

impl<E: Clone + PartialEq> TruncSeries<E> {
    pub fn zero<R: CoeffRing<Elem = E>>(r: &R, n: usize) -> Self {
        TruncSeries { coeffs: vec![r.zero(); n] }
    }

    pub fn one<R: CoeffRing<Elem = E>>(r: &R, n: usize) -> Self {
        Self::constant(r, r.one(), n)
    }

    pub fn constant<R: CoeffRing<Elem = E>>(r: &R, c: E, n: usize) -> Self {
        let mut s = Self::zero(r, n);
        if n > 0 {
            s.coeffs[0] = c;
        }
        s
    }

    /// The series `T` (or zero when `n <= 1`).
    pub fn t<R: CoeffRing<Elem = E>>(r: &R, n: usize) -> Self {
        let mut s = Self::zero(r, n);
        if n > 1 {
            s.coeffs[1] = r.one();
        }
        s
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn first_nonzero<R: CoeffRing<Elem = E>>(&self, r: &R) -> Option<usize> {
        self.coeffs.iter().position(|c| !r.is_zero(c))
    }

    pub fn valuation<R: CoeffRing<Elem = E>>(&self, r: &R) -> Valuation {
        match self.first_nonzero(r) {
            Some(i) => Valuation::Finite(i as i64),
            None => Valuation::AtLeast(self.len() as i64),
        }
    }

    pub fn is_zero<R: CoeffRing<Elem = E>>(&self, r: &R) -> bool {
        self.first_nonzero(r).is_none()
    }

    pub fn add<R: CoeffRing<Elem = E>>(&self, r: &R, o: &Self) -> Self {
        TruncSeries { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| r.add(a, b)).collect() }
    }

    pub fn add_assign<R: CoeffRing<Elem = E>>(&mut self, r: &R, o: &Self) {
        for (a, b) in self.coeffs.iter_mut().zip(&o.coeffs) {
            *a = r.add(a, b);
        }
    }

    pub fn sub<R: CoeffRing<Elem = E>>(&self, r: &R, o: &Self) -> Self {
        TruncSeries { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| r.sub(a, b)).collect() }
    }

    pub fn neg<R: CoeffRing<Elem = E>>(&self, r: &R) -> Self {
        TruncSeries { coeffs: self.coeffs.iter().map(|a| r.neg(a)).collect() }
    }

    pub fn scale<R: CoeffRing<Elem = E>>(&self, r: &R, c: &E) -> Self {
        TruncSeries { coeffs: self.coeffs.iter().map(|a| r.mul(a, c)).collect() }
    }

    pub fn frob<R: CoeffRing<Elem = E>>(&self, r: &R) -> Self {
        TruncSeries { coeffs: self.coeffs.iter().map(|a| r.frob(a)).collect() }
    }

    /// Product modulo `T^len`, skipping leading zeros of both factors.
    pub fn mul<R: CoeffRing<Elem = E>>(&self, r: &R, o: &Self) -> Self {
        self.mul_trunc(r, o, self.len().min(o.len()))
    }

    /// Product with only the coefficients below `T^cut` computed; the result
    /// still has the common length, with zeros at and above `cut`.
    pub fn mul_trunc<R: CoeffRing<Elem = E>>(&self, r: &R, o: &Self, cut: usize) -> Self {
        let n = self.len().min(o.len());
        let cut = cut.min(n);
        let mut out = vec![r.zero(); n];
        let (Some(va), Some(vb)) = (self.first_nonzero(r), o.first_nonzero(r)) else {
            return TruncSeries { coeffs: out };
        };
        for i in va..cut.saturating_sub(vb) {
            let a = &self.coeffs[i];
            if r.is_zero(a) {
                continue;
            }
            for j in vb..cut - i {
                let b = &o.coeffs[j];
                if !r.is_zero(b) {
                    out[i + j] = r.add(&out[i + j], &r.mul(a, b));
                }
            }
        }
        TruncSeries { coeffs: out }
    }

    /// `self(g)` for `g` with zero constant term, by Horner's rule.
    pub fn compose<R: CoeffRing<Elem = E>>(&self, r: &R, g: &Self) -> Self {
        let n = self.len();
        let mut acc = Self::zero(r, n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(r, g);
            acc.coeffs[0] = r.add(&acc.coeffs[0], c);
        }
        acc
    }

    /// Coefficients shifted up by `k` (multiplication by `T^k`).
    pub fn shift<R: CoeffRing<Elem = E>>(&self, r: &R, k: usize) -> Self {
        let n = self.len();
        let mut out = vec![r.zero(); n];
        for i in 0..n.saturating_sub(k) {
            out[i + k] = self.coeffs[i].clone();
        }
        TruncSeries { coeffs: out }
    }
}
