//! The cyclic lemma for Łukasiewicz-type steps.

use alloc::vec::Vec;

use crate::tree::SubtreeList;
use crate::Error;

pub use crate::tree::assemble_tree;

/// The unique rotation index `j` such that the steps read from `j` cyclically form an
/// excursion: partial sums of `ℓ - 1` stay nonnegative until the last step reaches `-1`.
///
/// This is the first index in `0..k` where the prefix sum `S_i` attains its minimum.
pub fn cyc(steps: &[(u32, i64)]) -> Result<usize, Error> {
    let total: i64 = steps.iter().map(|s| s.1).sum();
    if steps.is_empty() || total != -1 {
        return Err(Error::BadEndpoint { ordinate: total });
    }
    let mut s = 0i64;
    let mut best = (0i64, 0usize);
    for (i, st) in steps.iter().enumerate().take(steps.len() - 1) {
        s += st.1;
        if s < best.0 {
            best = (s, i + 1);
        }
    }
    Ok(best.1)
}

/// Whether `steps` is an excursion as is.
pub fn is_excursion(steps: &[(u32, i64)]) -> bool {
    let mut s = 0i64;
    for (i, st) in steps.iter().enumerate() {
        s += st.1;
        if s < 0 && i + 1 != steps.len() {
            return false;
        }
    }
    s == -1
}

/// Rotates a bridge into its excursion.
pub fn rotate_to_excursion(list: &SubtreeList) -> Result<SubtreeList, Error> {
    let steps: Vec<(u32, i64)> = list.steps();
    let j = cyc(&steps)?;
    Ok(list.rotated(j))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(cyc(&[(0, 1), (1, -1), (1, -1)]).unwrap(), 0);
        assert_eq!(cyc(&[(1, -1), (0, 1), (1, -1)]).unwrap(), 1);
        assert_eq!(cyc(&[(1, -1), (1, -1), (0, 1)]).unwrap(), 2);
        assert_eq!(cyc(&[(1, -1)]).unwrap(), 0);
        assert_eq!(cyc(&[(0, 1), (1, -1)]), Err(Error::BadEndpoint { ordinate: 0 }));
        assert!(is_excursion(&[(0, 1), (1, -1), (1, -1)]));
        assert!(!is_excursion(&[(1, -1), (0, 1), (1, -1)]));
    }

    #[test]
    fn every_rotation_maps_to_the_same_excursion() {
        let base = [(0u32, 2i64), (1, -1), (0, 1), (1, -1), (1, -1), (1, -1)];
        assert!(is_excursion(&base));
        let k = base.len();
        for r in 0..k {
            let rot: Vec<(u32, i64)> = (0..k).map(|i| base[(i + r) % k]).collect();
            let j = cyc(&rot).unwrap();
            let back: Vec<(u32, i64)> = (0..k).map(|i| rot[(i + j) % k]).collect();
            assert_eq!(back, base);
        }
    }
}
