//! Arbitrary-precision helpers on top of `astro-float`, used when a double-precision
//! decision is ambiguous and by the certification tests.

use alloc::vec;
use alloc::vec::Vec;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use astro_float::BigFloat as Float;

const RM: RoundingMode = RoundingMode::ToEven;

/// Number of Stirling correction terms; with arguments shifted to at least 100 the first
/// omitted term is below `2^-300`.
const TERMS: usize = 30;
const SHIFT: u64 = 100;

pub struct Hp {
    p: usize,
    cc: Consts,
    stirling: Vec<BigFloat>,
}

impl Hp {
    /// A context working with `p`-bit mantissas.
    pub fn new(p: usize) -> Self {
        let cc = Consts::new().expect("constant cache");
        let mut hp = Hp { p, cc, stirling: Vec::new() };
        let bern = bernoulli_numbers(2 * TERMS);
        let coeffs: Vec<BigFloat> = (1..=TERMS)
            .map(|j| {
                let d = BigInt::from((2 * j) * (2 * j - 1));
                hp.rational(&(&bern[2 * j] / BigRational::from_integer(d)))
            })
            .collect();
        hp.stirling = coeffs;
        hp
    }

    pub fn precision(&self) -> usize {
        self.p
    }

    pub fn f(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    pub fn u(&self, x: u64) -> BigFloat {
        BigFloat::from_u64(x, self.p)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }

    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.p, RM, &mut self.cc)
    }

    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.p, RM, &mut self.cc)
    }

    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.p, RM)
    }

    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.p, RM)
    }

    pub fn tanh(&mut self, a: &BigFloat) -> BigFloat {
        a.tanh(self.p, RM, &mut self.cc)
    }

    /// `ln cosh a`, computed as `|a| + ln((1 + e^{-2|a|}) / 2)`.
    pub fn ln_cosh(&mut self, a: &BigFloat) -> BigFloat {
        let x = a.abs();
        let two = self.u(2);
        let e = self.exp(&self.mul(&two, &x).neg());
        let s = self.div(&self.add(&self.u(1), &e), &two);
        let l = self.ln(&s);
        self.add(&x, &l)
    }

    pub fn biguint(&self, n: &BigUint) -> BigFloat {
        let base = BigFloat::from_f64(18_446_744_073_709_551_616.0, self.p);
        let mut acc = BigFloat::from_u64(0, self.p);
        for d in n.iter_u64_digits().rev() {
            acc = self.add(&self.mul(&acc, &base), &self.u(d));
        }
        acc
    }

    pub fn rational(&self, q: &BigRational) -> BigFloat {
        let num = self.biguint(q.numer().magnitude());
        let den = self.biguint(q.denom().magnitude());
        let r = self.div(&num, &den);
        if q.is_negative() {
            r.neg()
        } else {
            r
        }
    }

    /// `ln Γ(x)` for `x > 0`.
    pub fn ln_gamma(&mut self, x: &BigFloat) -> BigFloat {
        let one = self.u(1);
        let shift = self.u(SHIFT);
        let mut y = x.clone();
        let mut prod = self.u(1);
        while y.cmp(&shift).unwrap_or(1) < 0 {
            prod = self.mul(&prod, &y);
            y = self.add(&y, &one);
        }
        let half = self.f(0.5);
        let ln_y = self.ln(&y);
        let pi = self.pi();
        let two_pi = self.mul(&self.u(2), &pi);
        let ln_2pi = self.ln(&two_pi);
        let mut s = self.sub(&self.mul(&self.sub(&y, &half), &ln_y), &y);
        s = self.add(&s, &self.mul(&half, &ln_2pi));
        let inv = self.div(&one, &y);
        let inv2 = self.mul(&inv, &inv);
        let mut pw = inv;
        for c in &self.stirling {
            s = s.add(&c.mul(&pw, self.p, RM), self.p, RM);
            pw = pw.mul(&inv2, self.p, RM);
        }
        let lp = self.ln(&prod);
        self.sub(&s, &lp)
    }

    /// `ln n!`.
    pub fn ln_factorial(&mut self, n: u64) -> BigFloat {
        let x = self.u(n + 1);
        self.ln_gamma(&x)
    }
}

/// Nearest `f64` to `x` (up to one unit in the last place).
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let Some((words, _, sign, e, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = *words.last().unwrap_or(&0);
    let next = if words.len() >= 2 { words[words.len() - 2] } else { 0 };
    // The mantissa is 0.b1b2... with b1 = 1; the two top words give 128 significant bits.
    let m = top as f64 + next as f64 * 5.421_010_862_427_522e-20;
    let v = libm::ldexp(m, e - 64);
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

/// Exact Bernoulli numbers `B_0..=B_n` (with `B_1 = -1/2`).
pub fn bernoulli_numbers(n: usize) -> Vec<BigRational> {
    let mut b = vec![BigRational::zero(); n + 1];
    b[0] = BigRational::one();
    // binom[j] holds C(m+1, j) for the current m.
    for m in 1..=n {
        let mut binom = BigInt::one();
        let mut s = BigRational::zero();
        for j in 0..m {
            s += &b[j] * BigRational::from_integer(binom.clone());
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        b[m] = -s / BigRational::from_integer(BigInt::from(m + 1));
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_small() {
        let b = bernoulli_numbers(12);
        let r = |p: i64, q: i64| BigRational::new(p.into(), q.into());
        assert_eq!(b[1], r(-1, 2));
        assert_eq!(b[2], r(1, 6));
        assert_eq!(b[3], r(0, 1));
        assert_eq!(b[4], r(-1, 30));
        assert_eq!(b[12], r(-691, 2730));
    }

    #[test]
    fn round_trip_f64() {
        let hp = Hp::new(256);
        for x in [1.0, -3.5, 0.1, 1e-300, 12345.678, 2.0f64.powi(70)] {
            assert_eq!(to_f64(&hp.f(x)), x);
        }
    }

    #[test]
    fn ln_gamma_matches_factorial() {
        let mut hp = Hp::new(256);
        let f20: u64 = (1..=20).product();
        let exact = hp.ln(&hp.u(f20));
        let v = hp.ln_factorial(20);
        let d = to_f64(&hp.sub(&v, &exact)).abs();
        assert!(d < 1e-70, "{d}");
        let half = hp.ln_gamma(&hp.f(0.5));
        let pi = hp.pi();
        let sqrt_pi = hp.ln(&hp.sqrt(&pi));
        assert!(to_f64(&hp.sub(&half, &sqrt_pi)).abs() < 1e-70);
    }

    #[test]
    fn ln_cosh_consistent() {
        let mut hp = Hp::new(256);
        let x = hp.f(0.75);
        let v = to_f64(&hp.ln_cosh(&x));
        assert!((v - crate::special::ln_cosh(0.75)).abs() < 1e-16);
    }
}
