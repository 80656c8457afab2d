//! The Artin–Hasse exponential `E(π)` and the parameter `π(T)` with
//! `E(π(T)) = 1 + T`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ring::{CoeffRing, ZpM};
use super::series::TruncSeries;
use super::DworkError;

/// Exact coefficients of `exp(Σ_i π^(p^i) / p^i)` below `π^n`, from the
/// recurrence `k a_k = Σ_{p^i <= k} a_{k - p^i}` obtained by differentiating.
pub fn artin_hasse_exact(p: u64, n: usize) -> Vec<BigRational> {
    let mut a: Vec<BigRational> = Vec::with_capacity(n);
    for k in 0..n {
        if k == 0 {
            a.push(BigRational::one());
            continue;
        }
        let mut s = BigRational::zero();
        let mut pi = 1usize;
        while pi <= k {
            s += &a[k - pi];
            pi *= p as usize;
        }
        a.push(s / BigRational::from_integer(BigInt::from(k)));
    }
    a
}

fn mobius(n: u64) -> i64 {
    let mut n = n;
    let mut sign = 1;
    let mut q = 2;
    while q * q <= n {
        if n.is_multiple_of(q) {
            n /= q;
            if n.is_multiple_of(q) {
                return 0;
            }
            sign = -sign;
        }
        q += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Independent expansion of `∏_{p ∤ i} (1 - π^i)^(-μ(i)/i)` below `π^n`.
pub fn artin_hasse_product(p: u64, n: usize) -> Vec<BigRational> {
    let mut acc: Vec<BigRational> = vec![BigRational::zero(); n];
    if n > 0 {
        acc[0] = BigRational::one();
    }
    for i in 1..n as u64 {
        if i % p == 0 || mobius(i) == 0 {
            continue;
        }
        let c = BigRational::new(BigInt::from(-mobius(i)), BigInt::from(i));
        // (1 - x)^c = Σ_j binom(c, j) (-x)^j with x = π^i.
        let mut factor = vec![BigRational::zero(); n];
        let mut binom = BigRational::one();
        let mut j = 0usize;
        while (j as u64) * i < n as u64 {
            let sign = if j.is_multiple_of(2) { BigRational::one() } else { -BigRational::one() };
            factor[j * i as usize] = &binom * sign;
            binom = binom * (&c - BigRational::from_integer(BigInt::from(j))) / BigRational::from_integer(BigInt::from(j + 1));
            j += 1;
        }
        let mut next = vec![BigRational::zero(); n];
        for (a, x) in acc.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (b, y) in factor.iter().enumerate().take(n - a) {
                if !y.is_zero() {
                    next[a + b] += x * y;
                }
            }
        }
        acc = next;
    }
    acc
}

/// Reduce a `p`-integral rational into `Z/p^M`.
pub fn reduce_rational(r: &ZpM, q: &BigRational) -> Result<u64, DworkError> {
    let m = BigInt::from(r.modulus());
    let den = q.denom().mod_floor(&m).to_u64().unwrap_or(0);
    let inv = r.inv(den).ok_or(DworkError::NotIntegral)?;
    let num = q.numer().mod_floor(&m).to_u64().expect("reduced below modulus");
    Ok(r.mul(&num, &inv))
}

/// `E(π)` modulo `(p^M, π^n)`.
pub fn artin_hasse(r: &ZpM, n: usize) -> Result<TruncSeries<u64>, DworkError> {
    let exact = artin_hasse_exact(r.p(), n);
    let coeffs = exact.iter().map(|c| reduce_rational(r, c)).collect::<Result<Vec<_>, _>>()?;
    Ok(TruncSeries { coeffs })
}

/// `π(T)` with `E(π(T)) = 1 + T` mod `T^n`, by fixed-point iteration
/// `π <- T - (E(π) - 1 - π)`: each pass fixes one more coefficient.
pub fn pi_of_t(r: &ZpM, n: usize) -> Result<TruncSeries<u64>, DworkError> {
    let e = artin_hasse(r, n)?;
    let mut tail = e.clone();
    tail.coeffs[0] = 0;
    if n > 1 {
        tail.coeffs[1] = 0;
    }
    let t = TruncSeries::t(r, n);
    let mut pi = t.clone();
    for _ in 0..n {
        pi = t.sub(r, &tail.compose(r, &pi));
    }
    Ok(pi)
}

/// Whether every coefficient of the exact series has denominator prime to `p`.
pub fn is_p_integral(p: u64, c: &[BigRational]) -> bool {
    let pb = BigInt::from(p);
    c.iter().all(|x| !(x.denom().abs() % &pb).is_zero() || x.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_coefficients() {
        for p in [2u64, 3, 5, 7] {
            let a = artin_hasse_exact(p, 6);
            assert!(a[0].is_one() && a[1].is_one());
        }
        // p = 2: exp(π + π^2/2 + ...) has π^2 coefficient 1/2 + 1/2 = 1.
        assert!(artin_hasse_exact(2, 4)[2].is_one());
    }

    #[test]
    fn product_formula_agrees_and_is_integral() {
        for p in [2u64, 3, 5, 7] {
            let a = artin_hasse_exact(p, 30);
            assert_eq!(a, artin_hasse_product(p, 30));
            assert!(is_p_integral(p, &a));
        }
    }

    #[test]
    fn pi_inverts_e() {
        let r = ZpM::new(5, 3).unwrap();
        let n = 12;
        let e = artin_hasse(&r, n).unwrap();
        let pi = pi_of_t(&r, n).unwrap();
        assert_eq!(pi.coeffs[1], 1);
        let mut lhs = e.compose(&r, &pi);
        lhs.coeffs[0] = r.sub(&lhs.coeffs[0], &1);
        assert_eq!(lhs, TruncSeries::t(&r, n));
    }

    #[test]
    fn pi_is_t_mod_p_at_first_order() {
        for p in [3u64, 5, 7, 11] {
            let r = ZpM::new(p, 2).unwrap();
            assert_eq!(pi_of_t(&r, 6).unwrap().coeffs[1] % p, 1);
        }
    }

    #[test]
    fn mobius_values() {
        assert_eq!((1..=10).map(mobius).collect::<Vec<_>>(), vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }
}
