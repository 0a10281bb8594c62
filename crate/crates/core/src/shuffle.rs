//! Uniform interleavings of two blocks and Fisher–Yates permutations.

use alloc::vec::Vec;

use crate::random::BitSource;

/// Bits of the dyadic approximation of the coin used by [`bbhl_shuffle`].
pub const COIN_BITS: u32 = 16;

/// A uniformly random word with `ones` trues and `zeros` falses.
///
/// Letters are drawn from a biased coin close to `ones / (ones + zeros)` until a symbol
/// overflows its budget; the remaining letters are then inserted one by one at uniform
/// positions. The output is uniform for any coin bias.
pub fn bbhl_shuffle(ones: usize, zeros: usize, bits: &mut BitSource) -> Vec<bool> {
    let n = ones + zeros;
    let mut word = Vec::with_capacity(n);
    if ones == 0 || zeros == 0 {
        word.resize(n, ones > 0);
        return word;
    }
    let scale = 1u64 << COIN_BITS;
    let t = ((ones as u128 * scale as u128 + n as u128 / 2) / n as u128).clamp(1, scale as u128 - 1) as u64;
    let t = t << (64 - COIN_BITS);
    let (mut c1, mut c0) = (0usize, 0usize);
    while word.len() < n {
        let b = bits.bernoulli_u64(t);
        if b && c1 == ones || !b && c0 == zeros {
            break;
        }
        if b {
            c1 += 1;
        } else {
            c0 += 1;
        }
        word.push(b);
    }
    let rest = c1 < ones;
    while word.len() < n {
        let j = word.len();
        word.push(rest);
        let p = bits.uniform_below(j as u64 + 1) as usize;
        word.swap(j, p);
    }
    word
}

/// Shuffles `items` uniformly in place.
pub fn fisher_yates<T>(items: &mut [T], bits: &mut BitSource) {
    for i in (1..items.len()).rev() {
        let j = bits.uniform_below(i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_are_exact() {
        let mut bits = BitSource::new(9);
        for (k, m) in [(0, 5), (5, 0), (1, 1), (3, 17), (100, 1), (250, 250)] {
            let w = bbhl_shuffle(k, m, &mut bits);
            assert_eq!(w.len(), k + m);
            assert_eq!(w.iter().filter(|&&b| b).count(), k);
        }
    }

    #[test]
    fn two_of_four_is_uniform() {
        let mut bits = BitSource::new(2);
        let mut hist = [0u32; 16];
        let n = 60_000;
        for _ in 0..n {
            let w = bbhl_shuffle(2, 2, &mut bits);
            let code = w.iter().fold(0, |acc, &b| acc * 2 + b as usize);
            hist[code] += 1;
        }
        let e = n as f64 / 6.0;
        let chi: f64 = hist.iter().filter(|&&c| c > 0).map(|&c| (c as f64 - e).powi(2) / e).sum();
        assert_eq!(hist.iter().filter(|&&c| c > 0).count(), 6);
        assert!(chi < 20.5, "chi2 = {chi}");
    }

    #[test]
    fn fisher_yates_is_a_permutation() {
        let mut bits = BitSource::new(4);
        let mut v: Vec<u32> = (0..100).collect();
        fisher_yates(&mut v, &mut bits);
        let mut s = v.clone();
        s.sort();
        assert_eq!(s, (0..100).collect::<Vec<_>>());
    }
}
