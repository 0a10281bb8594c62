//! Seeded bit source with exact accounting, and the primitive samplers built on it.
//!
//! The generator is xoshiro256** seeded through SplitMix64 (`seed_from_u64`). Every
//! primitive below consumes bits one at a time (most significant first) and stops as soon
//! as the outcome is decided, so `bits_consumed` measures the entropy actually used.

use alloc::vec::Vec;
use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256StarStar};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Derives the seed of an independent stream from a master seed.
///
/// `split_seed(s, i)` is the first output of SplitMix64 started at `s + i * 0x9E3779B97F4A7C15`.
pub fn split_seed(seed: u64, stream: u64) -> u64 {
    let mut sm = SplitMix64::seed_from_u64(seed.wrapping_add(stream.wrapping_mul(GOLDEN_GAMMA)));
    sm.next_u64()
}

#[derive(Clone, Debug)]
pub struct BitSource {
    seed: u64,
    rng: Xoshiro256StarStar,
    buf: u64,
    avail: u32,
    consumed: u64,
}

impl BitSource {
    pub fn new(seed: u64) -> Self {
        BitSource {
            seed,
            rng: Xoshiro256StarStar::seed_from_u64(seed),
            buf: 0,
            avail: 0,
            consumed: 0,
        }
    }

    /// Independent source for stream `stream`, see [`split_seed`].
    pub fn split(&self, stream: u64) -> BitSource {
        BitSource::new(split_seed(self.seed, stream))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bits_consumed(&self) -> u64 {
        self.consumed
    }

    #[inline]
    pub fn bit(&mut self) -> bool {
        if self.avail == 0 {
            self.buf = self.rng.next_u64();
            self.avail = 64;
        }
        self.avail -= 1;
        self.consumed += 1;
        (self.buf >> self.avail) & 1 == 1
    }

    /// `k <= 64` bits as an integer, first bit most significant.
    pub fn bits(&mut self, k: u32) -> u64 {
        assert!(k <= 64);
        if k == 0 {
            return 0;
        }
        self.consumed += k as u64;
        if k <= self.avail {
            self.avail -= k;
            let v = self.buf >> self.avail;
            return if k == 64 { v } else { v & ((1u64 << k) - 1) };
        }
        let have = self.avail;
        let hi = if have == 0 { 0 } else { self.buf & ((1u64 << have) - 1) };
        let need = k - have;
        self.buf = self.rng.next_u64();
        self.avail = 64 - need;
        let lo = self.buf >> self.avail;
        if need == 64 {
            lo
        } else {
            (hi << need) | lo
        }
    }

    /// Bernoulli with parameter `p`, compared against the 64-bit truncation of `p`.
    ///
    /// The comparison stops at the first differing bit, or when the remaining bits of the
    /// truncation are all zero, so `p = 1/2` costs one bit and `p = 0` none.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        if !(p > 0.0) {
            return false;
        }
        if p >= 1.0 {
            return true;
        }
        let t = prob_to_u64(p);
        self.bernoulli_u64(t)
    }

    /// Bernoulli with parameter `t / 2^64`.
    pub fn bernoulli_u64(&mut self, t: u64) -> bool {
        let mut rest = t;
        for i in (0..64).rev() {
            if rest == 0 {
                return false;
            }
            let pb = (t >> i) & 1 == 1;
            let b = self.bit();
            if b != pb {
                return pb;
            }
            rest &= !(1u64 << i);
        }
        false
    }

    /// Bernoulli with exact parameter `num / den`, `num <= den`.
    pub fn bernoulli_ratio(&mut self, num: u64, den: u64) -> bool {
        assert!(den > 0 && num <= den);
        if num == 0 {
            return false;
        }
        if num == den {
            return true;
        }
        // Long division of num/den, one binary digit per drawn bit.
        let den = den as u128;
        let mut r = num as u128;
        loop {
            r *= 2;
            let pb = r >= den;
            if pb {
                r -= den;
            }
            let b = self.bit();
            if b != pb {
                return pb;
            }
            if r == 0 {
                return false;
            }
        }
    }

    /// Bernoulli with an exact rational parameter in `[0, 1]`.
    pub fn bernoulli_rational(&mut self, p: &BigRational) -> bool {
        assert!(!p.is_negative() && p <= &BigRational::one());
        let den = p.denom().magnitude().clone();
        let mut r = p.numer().magnitude().clone();
        if r.is_zero() {
            return false;
        }
        if r == den {
            return true;
        }
        loop {
            r <<= 1;
            let pb = r >= den;
            if pb {
                r -= &den;
            }
            let b = self.bit();
            if b != pb {
                return pb;
            }
            if r.is_zero() {
                return false;
            }
        }
    }

    /// Uniform integer in `[0, n)` by rejection on `ceil(log2 n)` bits.
    pub fn uniform_below(&mut self, n: u64) -> u64 {
        assert!(n >= 1);
        if n == 1 {
            return 0;
        }
        let k = 64 - (n - 1).leading_zeros();
        loop {
            let x = self.bits(k);
            if x < n {
                return x;
            }
        }
    }

    /// Index `i` with probability `w_i / Σw` for nonnegative finite reals.
    pub fn discrete(&mut self, weights: &[f64]) -> usize {
        let cum = cumulative_thresholds(weights);
        self.discrete_thresholds(&cum)
    }

    /// Samples from cumulative thresholds as produced by [`cumulative_thresholds`].
    ///
    /// The uniform variate is refined one bit at a time until its dyadic interval lies
    /// inside a single bucket.
    pub fn discrete_thresholds(&mut self, cum: &[u128]) -> usize {
        debug_assert_eq!(cum.last().copied(), Some(1u128 << 64));
        if cum.len() == 1 {
            return 0;
        }
        let mut lo: u128 = 0;
        let mut width: u128 = 1u128 << 64;
        let mut i = 0usize;
        loop {
            while cum[i] <= lo {
                i += 1;
            }
            if lo + width <= cum[i] {
                return i;
            }
            width >>= 1;
            if self.bit() {
                lo += width;
            }
        }
    }

    /// Index `i` with probability `w_i / Σw` for exact nonnegative integers.
    pub fn discrete_biguint(&mut self, weights: &[BigUint]) -> usize {
        let mut cum = Vec::with_capacity(weights.len());
        let mut acc = BigUint::zero();
        for w in weights {
            acc += w;
            cum.push(acc.clone());
        }
        let total = acc;
        assert!(!total.is_zero(), "all weights are zero");
        // U lies in [x / 2^j, (x+1) / 2^j); bucket i is [cum[i-1], cum[i]) / total.
        let mut x = BigUint::zero();
        let mut scale = BigUint::one();
        let mut i = 0usize;
        loop {
            let lo = &x * &total;
            while &cum[i] * &scale <= lo {
                i += 1;
            }
            let hi = lo + &total;
            if hi <= &cum[i] * &scale {
                return i;
            }
            x <<= 1;
            scale <<= 1;
            if self.bit() {
                x += 1u32;
            }
        }
    }

    /// Index `i` with probability `w_i / Σw` for exact nonnegative rationals.
    pub fn discrete_rational(&mut self, weights: &[BigRational]) -> usize {
        let ints = rationals_to_integers(weights);
        self.discrete_biguint(&ints)
    }

    /// A uniform variate on `[0,1)` with no bits revealed yet.
    pub fn lazy_uniform(&mut self) -> LazyUniform {
        LazyUniform { x: BigUint::zero(), j: 0 }
    }
}

/// A uniform variate on `[0,1)` revealed bit by bit: it lies in `[x/2^j, (x+1)/2^j)`.
#[derive(Clone, Debug)]
pub struct LazyUniform {
    pub x: BigUint,
    pub j: u32,
}

impl LazyUniform {
    pub fn extend(&mut self, bits: &mut BitSource, k: u32) {
        for _ in 0..k {
            self.x <<= 1;
            if bits.bit() {
                self.x += 1u32;
            }
            self.j += 1;
        }
    }

    /// Bounds of the current dyadic interval as `f64`, rounded outward.
    pub fn bounds_f64(&self) -> (f64, f64) {
        let scale = libm::ldexp(1.0, -(self.j as i32));
        let x = self.x.to_f64().unwrap_or(f64::INFINITY);
        let lo = x * scale;
        let hi = (x + 1.0) * scale;
        (lo.next_down(), hi.next_up())
    }
}

pub(crate) fn prob_to_u64(p: f64) -> u64 {
    if p >= 1.0 {
        return u64::MAX;
    }
    if !(p > 0.0) {
        return 0;
    }
    // p * 2^64 is exact in f64; truncation keeps the 64 leading bits.
    let scaled = p * 18_446_744_073_709_551_616.0;
    if scaled >= 18_446_744_073_709_551_615.0 {
        u64::MAX
    } else {
        scaled as u64
    }
}

/// Cumulative thresholds in units of `2^-64` summing to exactly `2^64`.
///
/// Each weight is rounded to the nearest multiple of `2^-64` of its normalized value and
/// the rounding residual is assigned to the largest entry.
pub fn cumulative_thresholds(weights: &[f64]) -> Vec<u128> {
    assert!(!weights.is_empty());
    let total: f64 = weights.iter().sum();
    assert!(total > 0.0 && total.is_finite(), "weights must have a positive finite sum");
    let one: u128 = 1u128 << 64;
    let mut q: Vec<u128> = weights
        .iter()
        .map(|&w| {
            assert!(w >= 0.0, "negative weight");
            libm::round(w / total * 18_446_744_073_709_551_616.0) as u128
        })
        .collect();
    let (imax, _) = weights
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &w)| if w > acc.1 { (i, w) } else { acc });
    let others: u128 = q.iter().enumerate().filter(|(i, _)| *i != imax).map(|(_, v)| *v).sum();
    q[imax] = one.saturating_sub(others);
    let mut acc = 0u128;
    let mut cum = Vec::with_capacity(q.len());
    for v in q {
        acc += v;
        cum.push(acc);
    }
    *cum.last_mut().unwrap() = one;
    cum
}

/// Scales rationals by the lcm of their denominators.
pub fn rationals_to_integers(weights: &[BigRational]) -> Vec<BigUint> {
    let mut l = BigUint::one();
    for w in weights {
        assert!(!w.is_negative(), "negative weight");
        l = l.lcm(w.denom().magnitude());
    }
    weights
        .iter()
        .map(|w| w.numer().magnitude() * (&l / w.denom().magnitude()))
        .collect()
}
