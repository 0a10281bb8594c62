//! Exact counting, exact recursive sampling and brute-force enumeration.
//!
//! Everything here uses exact rationals and is meant as ground truth for the fast
//! sampler, not as a performance path.

use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::random::BitSource;
use crate::spec::{CombinatorialSpec, MonoId};
use crate::tree::ColoredTree;
use crate::Error;

/// Default cap on the number of structures produced by [`enumerate_structures`].
pub const DEFAULT_CAP: usize = 1_000_000;

/// Weighted counts `Y_α,n = [z^n] Y_α(z)` for `n <= N`.
#[derive(Clone, Debug)]
pub struct CountTables {
    n_max: usize,
    counts: Vec<Vec<BigRational>>,
    // suffix[mono][j][s]: [z^s] of the product of the child series j, j+1, ... of the monomial.
    suffix: Vec<Vec<Vec<BigRational>>>,
}

impl CountTables {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `Y_α,n`.
    pub fn count(&self, a: usize, n: usize) -> &BigRational {
        &self.counts[a][n]
    }

    /// `A_n = Y_0,n`.
    pub fn a(&self, n: usize) -> &BigRational {
        &self.counts[0][n]
    }

    fn suffix_at(&self, spec: &CombinatorialSpec, id: MonoId, j: usize, s: usize) -> BigRational {
        let k = spec.mono(id).children.len();
        if j == k {
            return if s == 0 { BigRational::one() } else { BigRational::zero() };
        }
        self.suffix[id.0 as usize][j][s].clone()
    }

    /// Weight of the trees of size `s` whose root uses monomial `id`.
    fn mono_weight(&self, spec: &CombinatorialSpec, id: MonoId, s: usize) -> BigRational {
        let m = spec.mono(id);
        let h = m.h as usize;
        if h > s {
            return BigRational::zero();
        }
        &m.exact * self.suffix_at(spec, id, 0, s - h)
    }
}

pub fn count_coefficients(spec: &CombinatorialSpec, n_max: usize) -> CountTables {
    let m1 = spec.num_symbols();
    let zero = BigRational::zero();
    let mut t = CountTables {
        n_max,
        counts: vec![vec![zero.clone(); n_max + 1]; m1],
        suffix: (0..spec.num_monos())
            .map(|i| vec![vec![zero.clone(); n_max + 1]; spec.mono(MonoId(i as u32)).children.len()])
            .collect(),
    };
    let monos: Vec<MonoId> = (0..spec.num_monos() as u32).map(MonoId).collect();
    for n in 1..=n_max {
        // Suffixes of length >= 2 only involve sizes below n.
        for &id in &monos {
            let ch = spec.mono(id).children.clone();
            let k = ch.len();
            if k < 2 {
                continue;
            }
            for j in (0..k - 1).rev() {
                let mut acc = BigRational::zero();
                for s in 1..n {
                    let y = &t.counts[ch[j] as usize][s];
                    if y.is_zero() {
                        continue;
                    }
                    let rest = &t.suffix[id.0 as usize][j + 1][n - s];
                    if !rest.is_zero() {
                        acc += y * rest;
                    }
                }
                t.suffix[id.0 as usize][j][n] = acc;
            }
        }
        // Nonlinear part of Y(n), then the nilpotent linear part by iteration.
        let mut base = vec![BigRational::zero(); m1];
        let mut linear: Vec<(usize, usize, BigRational)> = Vec::new();
        for &id in &monos {
            let m = spec.mono(id);
            if m.h == 0 && m.children.len() == 1 {
                linear.push((m.color as usize, m.children[0] as usize, m.exact.clone()));
                continue;
            }
            let w = t.mono_weight(spec, id, n);
            if !w.is_zero() {
                base[m.color as usize] += w;
            }
        }
        let mut y = base.clone();
        for _ in 0..m1 {
            let mut next = base.clone();
            for (a, b, c) in &linear {
                if !y[*b].is_zero() {
                    next[*a] += c * &y[*b];
                }
            }
            y = next;
        }
        for a in 0..m1 {
            t.counts[a][n] = y[a].clone();
        }
        for &id in &monos {
            let ch = &spec.mono(id).children;
            if let Some(&last) = ch.last() {
                let k = ch.len();
                t.suffix[id.0 as usize][k - 1][n] = t.counts[last as usize][n].clone();
            }
        }
    }
    t
}

/// Draws a tree of size `n` with probability exactly `W(T) / A_n`.
pub fn oracle_sample(
    spec: &CombinatorialSpec,
    tables: &CountTables,
    n: usize,
    bits: &mut BitSource,
) -> Result<ColoredTree, Error> {
    assert!(n <= tables.n_max, "count tables only reach size {}", tables.n_max);
    if n == 0 || tables.a(n).is_zero() {
        return Err(Error::EmptySizeClass { n });
    }
    let mut out = Vec::new();
    let mut tasks: Vec<(u16, usize)> = vec![(0, n)];
    while let Some((a, s)) = tasks.pop() {
        let ids: Vec<MonoId> = spec.monos_of(a as usize).collect();
        let w: Vec<BigRational> = ids.iter().map(|&id| tables.mono_weight(spec, id, s)).collect();
        let id = ids[bits.discrete_rational(&w)];
        out.push(id);
        let m = spec.mono(id);
        let k = m.children.len();
        let mut rem = s - m.h as usize;
        let mut sizes = Vec::with_capacity(k);
        for j in 0..k {
            if j + 1 == k {
                sizes.push(rem);
                break;
            }
            let c = m.children[j] as usize;
            let ts: Vec<usize> = (1..=rem - (k - 1 - j)).collect();
            let w: Vec<BigRational> = ts
                .iter()
                .map(|&t| tables.count(c, t) * tables.suffix_at(spec, id, j + 1, rem - t))
                .collect();
            let t = ts[bits.discrete_rational(&w)];
            sizes.push(t);
            rem -= t;
        }
        for j in (0..k).rev() {
            tasks.push((m.children[j], sizes[j]));
        }
    }
    Ok(ColoredTree::new(out))
}

type Item = (Vec<MonoId>, BigRational);

/// Memoised generator of all trees (or all subtrees without colour-0 children) by colour
/// and size.
pub(crate) struct Enumerator<'a> {
    spec: &'a CombinatorialSpec,
    no_color0_children: bool,
    cap: usize,
    memo: BTreeMap<(u16, u32), Rc<Vec<Item>>>,
}

impl<'a> Enumerator<'a> {
    pub(crate) fn new(spec: &'a CombinatorialSpec, no_color0_children: bool, cap: usize) -> Self {
        Enumerator { spec, no_color0_children, cap, memo: BTreeMap::new() }
    }

    pub(crate) fn generate(&mut self, a: u16, s: u32) -> Result<Rc<Vec<Item>>, Error> {
        if let Some(r) = self.memo.get(&(a, s)) {
            return Ok(r.clone());
        }
        let mut out: Vec<Item> = Vec::new();
        let spec = self.spec;
        for id in spec.monos_of(a as usize) {
            let m = spec.mono(id);
            if self.no_color0_children && m.k[0] > 0 {
                continue;
            }
            if m.h > s {
                continue;
            }
            let rem = s - m.h;
            let k = m.children.len() as u32;
            if k == 0 {
                if rem == 0 {
                    out.push((vec![id], m.exact.clone()));
                }
                continue;
            }
            if rem < k {
                continue;
            }
            let mut sizes = vec![0u32; k as usize];
            self.compositions(id, rem, 0, &mut sizes, &mut out)?;
        }
        if out.len() > self.cap {
            return Err(Error::CapExceeded { cap: self.cap });
        }
        let r = Rc::new(out);
        self.memo.insert((a, s), r.clone());
        Ok(r)
    }

    fn compositions(
        &mut self,
        id: MonoId,
        rem: u32,
        j: usize,
        sizes: &mut Vec<u32>,
        out: &mut Vec<Item>,
    ) -> Result<(), Error> {
        let k = sizes.len();
        if j + 1 == k {
            sizes[j] = rem;
            return self.product(id, sizes, out);
        }
        let left = (k - 1 - j) as u32;
        for t in 1..=rem - left {
            sizes[j] = t;
            self.compositions(id, rem - t, j + 1, sizes, out)?;
        }
        Ok(())
    }

    fn product(&mut self, id: MonoId, sizes: &[u32], out: &mut Vec<Item>) -> Result<(), Error> {
        let m = self.spec.mono(id);
        let children = m.children.clone();
        let mut lists = Vec::with_capacity(children.len());
        for (c, &t) in children.iter().zip(sizes) {
            let l = self.generate(*c, t)?;
            if l.is_empty() {
                return Ok(());
            }
            lists.push(l);
        }
        let mut idx = vec![0usize; lists.len()];
        loop {
            let mut nodes = vec![id];
            let mut w = m.exact.clone();
            for (l, &i) in lists.iter().zip(&idx) {
                nodes.extend_from_slice(&l[i].0);
                w *= &l[i].1;
            }
            out.push((nodes, w));
            if out.len() > self.cap {
                return Err(Error::CapExceeded { cap: self.cap });
            }
            // Odometer increment, last list fastest.
            let mut p = lists.len();
            loop {
                if p == 0 {
                    return Ok(());
                }
                p -= 1;
                idx[p] += 1;
                if idx[p] < lists[p].len() {
                    break;
                }
                idx[p] = 0;
            }
        }
    }
}

/// All trees of size `n` with their weights; duplicate-free.
pub fn enumerate_structures(
    spec: &CombinatorialSpec,
    n: usize,
    cap: usize,
) -> Result<Vec<(ColoredTree, BigRational)>, Error> {
    let mut e = Enumerator::new(spec, false, cap);
    let items = e.generate(0, n as u32)?;
    Ok(items.iter().map(|(nodes, w)| (ColoredTree::new(nodes.clone()), w.clone())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use alloc::collections::BTreeSet;

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn catalan_numbers() {
        let spec = models::binary_trees();
        let t = count_coefficients(&spec, 10);
        let want = [0, 1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862];
        for n in 0..=10 {
            assert_eq!(t.a(n), &int(want[n]));
        }
    }

    #[test]
    fn rhv_small_counts() {
        let spec = models::rhv();
        let t = count_coefficients(&spec, 6);
        assert_eq!(t.a(1), &int(1));
        assert_eq!(t.a(2), &int(2));
        assert_eq!(t.a(3), &int(4));
        for n in 1..=6 {
            let e = enumerate_structures(&spec, n, DEFAULT_CAP).unwrap();
            let total: BigRational = e.iter().map(|(_, w)| w.clone()).sum();
            assert_eq!(&total, t.a(n), "n = {n}");
            let set: BTreeSet<_> = e.iter().map(|(t, _)| t.clone()).collect();
            assert_eq!(set.len(), e.len());
            assert!(e.iter().all(|(tr, _)| tr.is_valid(&spec) && tr.size(&spec) == n));
        }
    }

    #[test]
    fn enumeration_matches_catalan() {
        let spec = models::binary_trees();
        let e = enumerate_structures(&spec, 4, DEFAULT_CAP).unwrap();
        assert_eq!(e.len(), 5);
        assert!(matches!(enumerate_structures(&spec, 12, 100), Err(Error::CapExceeded { cap: 100 })));
    }

    #[test]
    fn linear_chains_are_counted() {
        // A = z + B + A^2, B = z A + z: the linear monomial A -> B is resolved within a size.
        use crate::spec::Monomial;
        use alloc::string::ToString;
        let spec = CombinatorialSpec::new(
            vec!["A".to_string(), "B".to_string()],
            vec![
                vec![Monomial::unit(1, vec![0, 0]), Monomial::unit(0, vec![0, 1]), Monomial::unit(0, vec![2, 0])],
                vec![Monomial::unit(1, vec![1, 0]), Monomial::unit(1, vec![0, 0])],
            ],
        )
        .unwrap();
        let t = count_coefficients(&spec, 7);
        for n in 1..=7 {
            let e = enumerate_structures(&spec, n, DEFAULT_CAP).unwrap();
            let total: BigRational = e.iter().map(|(_, w)| w.clone()).sum();
            assert_eq!(&total, t.a(n), "n = {n}");
        }
    }

    #[test]
    fn oracle_sample_sizes() {
        let spec = models::rhv();
        let t = count_coefficients(&spec, 30);
        let mut bits = BitSource::new(1);
        for n in [1usize, 2, 7, 30] {
            let tr = oracle_sample(&spec, &t, n, &mut bits).unwrap();
            assert!(tr.is_valid(&spec));
            assert_eq!(tr.size(&spec), n);
        }
    }

    #[test]
    fn empty_size_class() {
        // A = z^2 + A^2 only has even sizes.
        use crate::spec::Monomial;
        use alloc::string::ToString;
        let spec = CombinatorialSpec::new(
            vec!["A".to_string()],
            vec![vec![Monomial::unit(2, vec![0]), Monomial::unit(0, vec![2])]],
        )
        .unwrap();
        let t = count_coefficients(&spec, 5);
        let mut bits = BitSource::new(1);
        assert_eq!(oracle_sample(&spec, &t, 3, &mut bits), Err(Error::EmptySizeClass { n: 3 }));
        assert!(oracle_sample(&spec, &t, 4, &mut bits).is_ok());
    }
}
