//! Coloured trees and the subtrees obtained by cutting them at target-colour nodes.
//!
//! Trees are stored as preorder lists of internal nodes. A node refers to its monomial;
//! its `h` z-leaves are implicit and its other children follow in the monomial's
//! canonical child order.

use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::One;

use crate::spec::{CombinatorialSpec, MonoId};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Node(MonoId),
    /// A cut child of colour 0.
    ALeaf,
}

/// A piece of the decomposition: an `A`-rooted tree whose colour-0 children are leaves.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subtree {
    pub nodes: Vec<Slot>,
    /// Number of z-leaves.
    pub v: u32,
    /// Number of A-leaves.
    pub l: u32,
}

impl Subtree {
    /// Wraps a preorder slot list, computing `v` and `ℓ`.
    pub fn from_nodes(spec: &CombinatorialSpec, nodes: Vec<Slot>) -> Self {
        let (v, l) = count_leaves(spec, &nodes);
        Subtree { nodes, v, l }
    }

    pub fn as_ref(&self) -> SubtreeRef<'_> {
        SubtreeRef { nodes: &self.nodes, v: self.v, l: self.l }
    }

    pub fn log_weight(&self, spec: &CombinatorialSpec) -> f64 {
        self.as_ref().log_weight(spec)
    }

    pub fn weight(&self, spec: &CombinatorialSpec) -> BigRational {
        self.as_ref().weight(spec)
    }

    /// The step `(v, ℓ - 1)`.
    pub fn step(&self) -> (u32, i32) {
        (self.v, self.l as i32 - 1)
    }

    /// Diagonal index `ũ = v + v0 (ℓ - 1)`.
    pub fn u_tilde(&self, v0: u32) -> i64 {
        self.v as i64 + v0 as i64 * (self.l as i64 - 1)
    }

    /// Checks the structural invariants against `spec`.
    pub fn is_valid(&self, spec: &CombinatorialSpec) -> bool {
        self.as_ref().is_valid(spec)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubtreeRef<'a> {
    pub nodes: &'a [Slot],
    pub v: u32,
    pub l: u32,
}

impl<'a> SubtreeRef<'a> {
    pub fn to_owned(&self) -> Subtree {
        Subtree { nodes: self.nodes.to_vec(), v: self.v, l: self.l }
    }

    pub fn log_weight(&self, spec: &CombinatorialSpec) -> f64 {
        self.nodes
            .iter()
            .map(|s| match s {
                Slot::Node(id) => spec.mono(*id).ln_coeff,
                Slot::ALeaf => 0.0,
            })
            .sum()
    }

    pub fn weight(&self, spec: &CombinatorialSpec) -> BigRational {
        let mut w = BigRational::one();
        for s in self.nodes {
            if let Slot::Node(id) = s {
                w *= &spec.mono(*id).exact;
            }
        }
        w
    }

    pub fn is_valid(&self, spec: &CombinatorialSpec) -> bool {
        let mut pending: Vec<u16> = Vec::new();
        let mut v = 0u32;
        let mut l = 0u32;
        for (i, s) in self.nodes.iter().enumerate() {
            let want = if i == 0 {
                Some(0u16)
            } else {
                match pending.pop() {
                    Some(c) => Some(c),
                    None => return false,
                }
            };
            match s {
                Slot::ALeaf => {
                    if i == 0 || want != Some(0) {
                        return false;
                    }
                    l += 1;
                }
                Slot::Node(id) => {
                    if id.0 as usize >= spec.num_monos() {
                        return false;
                    }
                    let m = spec.mono(*id);
                    if Some(m.color) != want || (i > 0 && m.color == 0) {
                        return false;
                    }
                    v += m.h;
                    pending.extend(m.children.iter().rev());
                }
            }
        }
        !self.nodes.is_empty() && pending.is_empty() && v == self.v && l == self.l
    }
}

fn count_leaves(spec: &CombinatorialSpec, nodes: &[Slot]) -> (u32, u32) {
    let mut v = 0;
    let mut l = 0;
    for s in nodes {
        match s {
            Slot::Node(id) => v += spec.mono(*id).h,
            Slot::ALeaf => l += 1,
        }
    }
    (v, l)
}

/// A sequence of subtrees stored in one arena.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubtreeList {
    slots: Vec<Slot>,
    starts: Vec<u32>,
    vl: Vec<(u32, u32)>,
}

impl SubtreeList {
    pub fn new() -> Self {
        SubtreeList { slots: Vec::new(), starts: vec![0], vl: Vec::new() }
    }

    pub fn with_capacity(subtrees: usize, slots: usize) -> Self {
        let mut starts = Vec::with_capacity(subtrees + 1);
        starts.push(0);
        SubtreeList { slots: Vec::with_capacity(slots), starts, vl: Vec::with_capacity(subtrees) }
    }

    pub fn clear(&mut self) {
        self.slots.clear();
        self.starts.clear();
        self.starts.push(0);
        self.vl.clear();
    }

    pub fn len(&self) -> usize {
        self.vl.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vl.is_empty()
    }

    pub fn push(&mut self, t: SubtreeRef<'_>) {
        self.slots.extend_from_slice(t.nodes);
        self.close(t.v, t.l);
    }

    /// Direct access to the arena for samplers that write slots in place; finish each
    /// subtree with [`SubtreeList::close`] or discard it with [`SubtreeList::discard_open`].
    pub fn arena(&mut self) -> &mut Vec<Slot> {
        &mut self.slots
    }

    pub fn close(&mut self, v: u32, l: u32) {
        self.starts.push(self.slots.len() as u32);
        self.vl.push((v, l));
    }

    pub fn discard_open(&mut self) {
        let s = *self.starts.last().unwrap() as usize;
        self.slots.truncate(s);
    }

    /// Removes the last closed subtree.
    pub fn truncate_last(&mut self) {
        if self.vl.pop().is_some() {
            self.starts.pop();
            let s = *self.starts.last().unwrap() as usize;
            self.slots.truncate(s);
        }
    }

    pub fn get(&self, i: usize) -> SubtreeRef<'_> {
        let (v, l) = self.vl[i];
        SubtreeRef {
            nodes: &self.slots[self.starts[i] as usize..self.starts[i + 1] as usize],
            v,
            l,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = SubtreeRef<'_>> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// `(v, ℓ)` of each subtree.
    pub fn leaf_counts(&self) -> &[(u32, u32)] {
        &self.vl
    }

    /// Steps `(v, ℓ - 1)`.
    pub fn steps(&self) -> Vec<(u32, i64)> {
        self.vl.iter().map(|&(v, l)| (v, l as i64 - 1)).collect()
    }

    pub fn total_slots(&self) -> usize {
        self.slots.len()
    }

    /// The list reordered so that entry `i` of the result is entry `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> SubtreeList {
        let mut out = SubtreeList::with_capacity(self.len(), self.slots.len());
        for &i in order {
            out.push(self.get(i));
        }
        out
    }

    /// The list rotated left by `j`.
    pub fn rotated(&self, j: usize) -> SubtreeList {
        let k = self.len();
        let order: Vec<usize> = (0..k).map(|i| (i + j) % k).collect();
        self.permuted(&order)
    }

    pub fn to_vec(&self) -> Vec<Subtree> {
        self.iter().map(|t| t.to_owned()).collect()
    }

    pub fn from_subtrees<'a>(items: impl IntoIterator<Item = &'a Subtree>) -> SubtreeList {
        let mut out = SubtreeList::new();
        for t in items {
            out.push(t.as_ref());
        }
        out
    }
}

/// A complete tree: root colour 0, `size` = number of z-leaves.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColoredTree {
    pub nodes: Vec<MonoId>,
}

impl ColoredTree {
    pub fn new(nodes: Vec<MonoId>) -> Self {
        ColoredTree { nodes }
    }

    pub fn size(&self, spec: &CombinatorialSpec) -> usize {
        self.nodes.iter().map(|&id| spec.mono(id).h as usize).sum()
    }

    pub fn internal_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn log_weight(&self, spec: &CombinatorialSpec) -> f64 {
        self.nodes.iter().map(|&id| spec.mono(id).ln_coeff).sum()
    }

    pub fn weight(&self, spec: &CombinatorialSpec) -> BigRational {
        let mut w = BigRational::one();
        for &id in &self.nodes {
            w *= &spec.mono(id).exact;
        }
        w
    }

    /// Root colour 0 and every child slot filled by a node of the expected colour.
    pub fn is_valid(&self, spec: &CombinatorialSpec) -> bool {
        let mut pending: Vec<u16> = vec![0];
        for &id in &self.nodes {
            let Some(want) = pending.pop() else { return false };
            if id.0 as usize >= spec.num_monos() {
                return false;
            }
            let m = spec.mono(id);
            if m.color != want {
                return false;
            }
            pending.extend(m.children.iter().rev());
        }
        pending.is_empty()
    }

    /// Preorder index one past the end of each node's subtree.
    pub fn subtree_ends(&self, spec: &CombinatorialSpec) -> Vec<usize> {
        let n = self.nodes.len();
        let mut end = vec![0usize; n];
        // (node index, children still to be seen)
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for i in 0..n {
            let arity = spec.mono(self.nodes[i]).children.len();
            stack.push((i, arity));
            while let Some(&(j, 0)) = stack.last() {
                end[j] = i + 1;
                stack.pop();
                if let Some(top) = stack.last_mut() {
                    top.1 -= 1;
                }
            }
        }
        end
    }

    /// Cuts the tree at every non-root colour-0 node; the pieces come out in preorder of
    /// their roots.
    pub fn decompose(&self, spec: &CombinatorialSpec) -> SubtreeList {
        let end = self.subtree_ends(spec);
        let mut out = SubtreeList::with_capacity(0, self.nodes.len());
        for p in 0..self.nodes.len() {
            if spec.mono(self.nodes[p]).color != 0 {
                continue;
            }
            let mut v = 0;
            let mut l = 0;
            let mut j = p;
            while j < end[p] {
                let m = spec.mono(self.nodes[j]);
                if j != p && m.color == 0 {
                    out.arena().push(Slot::ALeaf);
                    l += 1;
                    j = end[j];
                } else {
                    out.arena().push(Slot::Node(self.nodes[j]));
                    v += m.h;
                    j += 1;
                }
            }
            out.close(v, l);
        }
        out
    }
}

/// Grafts subtrees given in excursion order: subtree `i + 1` fills the first pending
/// A-leaf in preorder.
pub fn assemble_tree(list: &SubtreeList) -> Result<ColoredTree, Error> {
    let k = list.len();
    if k == 0 {
        return Err(Error::MalformedExcursion("empty list"));
    }
    let mut out = Vec::with_capacity(list.total_slots());
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    let mut next = 1usize;
    while let Some(top) = stack.last_mut() {
        let t = list.get(top.0);
        if top.1 == t.nodes.len() {
            stack.pop();
            continue;
        }
        let slot = t.nodes[top.1];
        top.1 += 1;
        match slot {
            Slot::Node(id) => out.push(id),
            Slot::ALeaf => {
                if next >= k {
                    return Err(Error::MalformedExcursion("subtrees exhausted before all slots were filled"));
                }
                stack.push((next, 0));
                next += 1;
            }
        }
    }
    if next != k {
        return Err(Error::MalformedExcursion("subtrees left over after the tree closed"));
    }
    Ok(ColoredTree { nodes: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn decompose_two_leaf_binary_tree() {
        let spec = models::binary_trees();
        let leaf = spec.mono_id(0, 0);
        let pair = spec.mono_id(0, 1);
        let tree = ColoredTree::new(vec![pair, leaf, leaf]);
        assert!(tree.is_valid(&spec));
        assert_eq!(tree.size(&spec), 2);
        let list = tree.decompose(&spec);
        assert_eq!(list.len(), 3);
        assert_eq!(list.get(0).nodes, &[Slot::Node(pair), Slot::ALeaf, Slot::ALeaf]);
        assert_eq!(list.leaf_counts(), &[(0, 2), (1, 0), (1, 0)]);
        assert_eq!(assemble_tree(&list).unwrap(), tree);
    }

    #[test]
    fn assemble_rejects_malformed() {
        let spec = models::binary_trees();
        let leaf = Subtree::from_nodes(&spec, vec![Slot::Node(spec.mono_id(0, 0))]);
        let pair = Subtree::from_nodes(&spec, vec![Slot::Node(spec.mono_id(0, 1)), Slot::ALeaf, Slot::ALeaf]);
        let l = SubtreeList::from_subtrees([&pair, &leaf]);
        assert!(assemble_tree(&l).is_err());
        let l = SubtreeList::from_subtrees([&leaf, &leaf]);
        assert!(assemble_tree(&l).is_err());
        let l = SubtreeList::from_subtrees([&leaf]);
        assert_eq!(assemble_tree(&l).unwrap().nodes.len(), 1);
    }

    #[test]
    fn subtree_validity() {
        let spec = models::rhv();
        let r4 = spec.mono_id(0, 3);
        let h_z = spec.mono_id(1, 0);
        let r_h2 = spec.mono_id(0, 1);
        let t = Subtree::from_nodes(&spec, vec![Slot::Node(r_h2), Slot::Node(h_z), Slot::Node(h_z)]);
        assert!(t.is_valid(&spec));
        assert_eq!((t.v, t.l), (2, 0));
        let t = Subtree::from_nodes(&spec, vec![Slot::Node(r4), Slot::ALeaf, Slot::ALeaf, Slot::ALeaf, Slot::ALeaf]);
        assert!(t.is_valid(&spec));
        assert_eq!(t.u_tilde(1), 3);
        let bad = Subtree::from_nodes(&spec, vec![Slot::Node(r4), Slot::ALeaf]);
        assert!(!bad.is_valid(&spec));
    }
}
