//! The minimal excursion step `v0`, the finite base class `T_{v0,0}` and a sample of the
//! step support.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::oracle::{Enumerator, DEFAULT_CAP};
use crate::random::{rationals_to_integers, BitSource};
use crate::spec::CombinatorialSpec;
use crate::tree::{Slot, Subtree};
use crate::Error;

/// Box used for the support sample: `v <= SUPPORT_V`, `ℓ <= SUPPORT_L`.
pub const SUPPORT_V: u32 = 8;
pub const SUPPORT_L: u32 = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct SubtreeCatalog {
    /// Smallest z-leaf count of a subtree without A-leaves.
    pub v0: u32,
    /// All subtrees with `v0` z-leaves and no A-leaves.
    pub base_trees: Vec<Subtree>,
    pub weights: Vec<BigRational>,
    /// `T0 = Σ W(t)` over the base trees.
    pub t0: BigRational,
    /// Steps `(v, ℓ - 1)` realisable inside the box, sorted.
    pub support_sample: Vec<(u32, i32)>,
    int_weights: Vec<BigUint>,
}

impl SubtreeCatalog {
    pub fn t0_f64(&self) -> f64 {
        self.t0.to_f64().unwrap_or(f64::NAN)
    }

    /// Index of a base tree drawn with probability `W(t) / T0`.
    pub fn sample_index(&self, bits: &mut BitSource) -> usize {
        bits.discrete_biguint(&self.int_weights)
    }

    /// A base tree drawn with probability `W(t) / T0`.
    pub fn sample_mu0(&self, bits: &mut BitSource) -> &Subtree {
        &self.base_trees[self.sample_index(bits)]
    }

    /// Whether a subtree with these leaf counts is in the base class.
    #[inline]
    pub fn is_base(&self, v: u32, l: u32) -> bool {
        v == self.v0 && l == 0
    }
}

pub fn compute_catalog(spec: &CombinatorialSpec) -> Result<SubtreeCatalog, Error> {
    let m1 = spec.num_symbols();
    // d[a]: fewest z-leaves of a colour-a tree without colour-0 nodes below the root.
    let inf = u64::MAX;
    let mut d = vec![inf; m1];
    let cost = |d: &[u64], a: usize| -> u64 {
        let mut best = inf;
        for id in spec.monos_of(a) {
            let m = spec.mono(id);
            if m.k[0] > 0 {
                continue;
            }
            let mut c = m.h as u64;
            for &ch in &m.children {
                if d[ch as usize] == inf {
                    c = inf;
                    break;
                }
                c += d[ch as usize];
            }
            best = best.min(c);
        }
        best
    };
    loop {
        let mut changed = false;
        for a in 1..m1 {
            let c = cost(&d, a);
            if c < d[a] {
                d[a] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let v0 = cost(&d, 0);
    if v0 == inf || v0 == 0 || v0 > u32::MAX as u64 {
        return Err(Error::NoExcursion);
    }
    let v0 = v0 as u32;

    let mut e = Enumerator::new(spec, true, DEFAULT_CAP);
    let items = e.generate(0, v0)?;
    let mut base_trees = Vec::with_capacity(items.len());
    let mut weights = Vec::with_capacity(items.len());
    for (nodes, w) in items.iter() {
        let slots: Vec<Slot> = nodes.iter().map(|&id| Slot::Node(id)).collect();
        base_trees.push(Subtree::from_nodes(spec, slots));
        weights.push(w.clone());
    }
    let t0: BigRational = weights.iter().cloned().sum();
    if base_trees.is_empty() || t0.is_zero() {
        return Err(Error::NoExcursion);
    }
    let int_weights = rationals_to_integers(&weights);
    Ok(SubtreeCatalog {
        v0,
        base_trees,
        weights,
        t0,
        support_sample: support_sample(spec),
        int_weights,
    })
}

/// Achievable `(v, ℓ)` pairs of subtrees inside the box, by a fixed point over colours.
fn support_sample(spec: &CombinatorialSpec) -> Vec<(u32, i32)> {
    let m1 = spec.num_symbols();
    let (bv, bl) = (SUPPORT_V as usize + 1, SUPPORT_L as usize + 1);
    let idx = |v: usize, l: usize| v * bl + l;
    let mut sets = vec![vec![false; bv * bl]; m1];
    // Colour-0 children are A-leaves.
    let leaf_a = {
        let mut s = vec![false; bv * bl];
        s[idx(0, 1)] = true;
        s
    };
    let expand = |sets: &Vec<Vec<bool>>, a: usize| -> Vec<bool> {
        let mut acc_all = vec![false; bv * bl];
        for id in spec.monos_of(a) {
            let m = spec.mono(id);
            if m.h as usize >= bv {
                continue;
            }
            let mut acc = vec![false; bv * bl];
            acc[idx(m.h as usize, 0)] = true;
            for &ch in &m.children {
                let s = if ch == 0 { &leaf_a } else { &sets[ch as usize] };
                let mut next = vec![false; bv * bl];
                for v1 in 0..bv {
                    for l1 in 0..bl {
                        if !acc[idx(v1, l1)] {
                            continue;
                        }
                        for v2 in 0..bv - v1 {
                            for l2 in 0..bl - l1 {
                                if s[idx(v2, l2)] {
                                    next[idx(v1 + v2, l1 + l2)] = true;
                                }
                            }
                        }
                    }
                }
                acc = next;
            }
            for i in 0..acc.len() {
                acc_all[i] |= acc[i];
            }
        }
        acc_all
    };
    loop {
        let mut changed = false;
        for a in 1..m1 {
            let s = expand(&sets, a);
            if s != sets[a] {
                sets[a] = s;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let root = expand(&sets, 0);
    let mut out = BTreeSet::new();
    for v in 0..bv {
        for l in 0..bl {
            if root[idx(v, l)] {
                out.insert((v as u32, l as i32 - 1));
            }
        }
    }
    out.into_iter().collect()
}
