//! The (1/4, 1/2, 1/4)-bridge model: walks from `(0,0)` to `(n,0)` with steps in
//! `{-1, 0, +1}` and weight `2^{n0}`.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Pow};

use crate::bridge::RunStats;
use crate::random::BitSource;
use crate::shuffle::bbhl_shuffle;
use crate::special::ln_factorial_interval;

const EPS: f64 = f64::EPSILON;
const LN_3: f64 = 1.098_612_288_668_109_8;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ToyBridge {
    pub steps: Vec<i8>,
}

impl ToyBridge {
    pub fn n(&self) -> usize {
        self.steps.len()
    }

    /// `(n+, n0, n-)`.
    pub fn counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for &s in &self.steps {
            match s {
                1 => c.0 += 1,
                0 => c.1 += 1,
                _ => c.2 += 1,
            }
        }
        c
    }

    pub fn is_bridge(&self) -> bool {
        self.steps.iter().all(|s| (-1..=1).contains(s)) && self.steps.iter().map(|&s| s as i64).sum::<i64>() == 0
    }
}

/// Maximiser of `c_{n,m} = 3^{n-m} C(n,m)`.
pub fn toy_m_star(n: u64) -> u64 {
    if n <= 3 {
        0
    } else {
        (n - 3).div_ceil(4)
    }
}

/// `r_n(m) = 3^{m*} (n-m*)! m*! / (3^m (n-m)! m!)` as an exact rational.
pub fn toy_r_exact(n: u64, m: u64) -> BigRational {
    let (num, den) = r_parts(n, m);
    BigRational::new(num.into(), den.into())
}

/// Numerator and denominator of `r_n(m)` after cancelling the common factorials.
fn r_parts(n: u64, m: u64) -> (BigUint, BigUint) {
    let ms = toy_m_star(n);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    let three = BigUint::from(3u32);
    if ms >= m {
        num *= Pow::pow(&three, (ms - m) as u32);
    } else {
        den *= Pow::pow(&three, (m - ms) as u32);
    }
    // (n-m*)!/(n-m)!
    if n - ms >= n - m {
        for x in n - m + 1..=n - ms {
            num *= x;
        }
    } else {
        for x in n - ms + 1..=n - m {
            den *= x;
        }
    }
    // m*!/m!
    if ms >= m {
        for x in m + 1..=ms {
            num *= x;
        }
    } else {
        for x in ms + 1..=m {
            den *= x;
        }
    }
    (num, den)
}

/// An interval containing `ln r_n(m)`, from the Robbins bounds.
pub fn toy_log_r_interval(n: u64, m: u64) -> (f64, f64) {
    let ms = toy_m_star(n);
    let (a_lo, a_hi) = ln_factorial_interval(n - ms);
    let (b_lo, b_hi) = ln_factorial_interval(ms);
    let (c_lo, c_hi) = ln_factorial_interval(n - m);
    let (d_lo, d_hi) = ln_factorial_interval(m);
    let t = (ms as f64 - m as f64) * LN_3;
    let slack = 8.0 * EPS * (t.abs() + a_hi.abs() + b_hi.abs() + c_hi.abs() + d_hi.abs());
    (t + a_lo + b_lo - c_hi - d_hi - slack, t + a_hi + b_hi - c_lo - d_lo + slack)
}

/// Naive Boltzmann: i.i.d. steps until the sum is zero.
pub fn toy_naive(n: usize, bits: &mut BitSource) -> ToyBridge {
    toy_naive_with_stats(n, bits, &mut RunStats::default())
}

pub fn toy_naive_with_stats(n: usize, bits: &mut BitSource, stats: &mut RunStats) -> ToyBridge {
    assert!(n >= 1);
    let mut steps = Vec::with_capacity(n);
    loop {
        stats.attempts += 1;
        steps.clear();
        let mut sum = 0i64;
        for _ in 0..n {
            let s = match bits.bits(2) {
                0 | 1 => 0,
                2 => 1,
                _ => -1,
            };
            sum += s as i64;
            steps.push(s);
        }
        if sum == 0 {
            stats.reached += 1;
            stats.accepted += 1;
            stats.r_sum += 1.0;
            return ToyBridge { steps };
        }
    }
}

/// Accelerated Boltzmann: a `0/+1` walk up to the `n`-th diagonal, acceptance `r_n(m)`,
/// then a balanced shuffle with the `m` down steps.
pub fn toy_accelerated(n: usize, bits: &mut BitSource) -> ToyBridge {
    toy_accelerated_with_stats(n, bits, &mut RunStats::default())
}

pub fn toy_accelerated_with_stats(n: usize, bits: &mut BitSource, stats: &mut RunStats) -> ToyBridge {
    assert!(n >= 1);
    let mut walk: Vec<i8> = Vec::with_capacity(n);
    loop {
        stats.attempts += 1;
        walk.clear();
        let mut u = 0usize;
        while u < n {
            let s = bits.bernoulli_ratio(1, 3) as i8;
            walk.push(s);
            u += 1 + s as usize;
        }
        if u != n {
            continue;
        }
        stats.reached += 1;
        let k = walk.len();
        let m = (n - k) as u64;
        let (lo, hi) = toy_log_r_interval(n as u64, m);
        stats.r_sum += libm::exp(0.5 * (lo + hi));
        if accept(n as u64, m, lo, hi, bits, stats) {
            stats.accepted += 1;
            let order = bbhl_shuffle(k, m as usize, bits);
            let mut it = walk.iter();
            let steps = order.iter().map(|&first| if first { *it.next().unwrap() } else { -1 }).collect();
            return ToyBridge { steps };
        }
    }
}

fn accept(n: u64, m: u64, lo: f64, hi: f64, bits: &mut BitSource, stats: &mut RunStats) -> bool {
    if m == toy_m_star(n) {
        return true;
    }
    let mut u = bits.lazy_uniform();
    u.extend(bits, 53);
    let (u_lo, u_hi) = u.bounds_f64();
    if u_hi <= libm::exp(lo) * (1.0 - 8.0 * EPS) {
        return true;
    }
    if u_lo >= libm::exp(hi) * (1.0 + 8.0 * EPS) {
        return false;
    }
    stats.escalations += 1;
    let (num, den) = r_parts(n, m);
    loop {
        let scaled = &num << u.j as usize;
        if (&u.x + 1u32) * &den <= scaled {
            return true;
        }
        if &u.x * &den >= scaled {
            return false;
        }
        u.extend(bits, 32);
    }
}

/// Exact step-by-step sampling: from height `h` with `r` steps left, step `ν` has weight
/// `2^{[ν=0]} C(2r-2, r-1+h+ν)`.
pub fn toy_exact_sample(n: usize, bits: &mut BitSource) -> ToyBridge {
    let mut steps = Vec::with_capacity(n);
    let mut h = 0i64;
    for j in 0..n {
        let r = (n - j) as i64;
        let w: Vec<BigUint> = [1i64, 0, -1]
            .iter()
            .map(|&nu| {
                let top = r - 1 + h + nu;
                if top < 0 || top > 2 * r - 2 {
                    return BigUint::from(0u32);
                }
                let c = binomial(BigUint::from((2 * r - 2) as u64), BigUint::from(top as u64));
                if nu == 0 {
                    c * 2u32
                } else {
                    c
                }
            })
            .collect();
        let nu = [1i8, 0, -1][bits.discrete_biguint(&w)];
        h += nu as i64;
        steps.push(nu);
    }
    ToyBridge { steps }
}

/// Every bridge of length `n` with its probability `2^{n0} / C(2n, n)`.
pub fn toy_exact(n: usize) -> Vec<(ToyBridge, BigRational)> {
    let total = binomial(BigUint::from(2 * n), BigUint::from(n));
    let mut out = Vec::new();
    let mut steps = Vec::with_capacity(n);
    fn rec(n: usize, steps: &mut Vec<i8>, sum: i64, total: &BigUint, out: &mut Vec<(ToyBridge, BigRational)>) {
        let left = (n - steps.len()) as i64;
        if sum.abs() > left {
            return;
        }
        if left == 0 {
            let b = ToyBridge { steps: steps.clone() };
            let n0 = b.counts().1;
            let w = BigUint::one() << n0;
            out.push((b, BigRational::new(w.into(), total.clone().into())));
            return;
        }
        for s in [-1i8, 0, 1] {
            steps.push(s);
            rec(n, steps, sum + s as i64, total, out);
            steps.pop();
        }
    }
    rec(n, &mut steps, 0, &total, &mut out);
    out
}

/// Probability that the `0/+1` walk hits the `n`-th diagonal: `(3 + (-3)^{-n}) / 4`.
pub fn toy_reach_probability(n: u64) -> BigRational {
    let p = BigRational::from_integer(3.into()).pow(n as i32);
    let sign = if n % 2 == 0 { 1 } else { -1 };
    (BigRational::from_integer(3.into()) + BigRational::from_integer(sign.into()) / p) / BigRational::from_integer(4.into())
}
