//! Output formats: `tree-paren` and JSON lines.
//!
//! A node is written `c(z z … child child …)` with `c` its colour, its z-leaves first
//! and then its children in canonical order. Cut colour-0 leaves of bridge subtrees are
//! written `A`. A bridge is a bracketed list of subtrees.

use std::collections::HashMap;
use std::fmt::Write;

use cfboltz_core::toy::ToyBridge;
use cfboltz_core::{ColoredTree, CombinatorialSpec, MonoId, Slot, Structure, SubtreeList};
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    TreeParen,
    Jsonl,
}

fn paren_rec(spec: &CombinatorialSpec, slots: &mut impl Iterator<Item = Slot>, out: &mut String) {
    match slots.next() {
        None => {}
        Some(Slot::ALeaf) => out.push('A'),
        Some(Slot::Node(id)) => {
            let m = spec.mono(id);
            let _ = write!(out, "{}(", m.color);
            let mut first = true;
            for _ in 0..m.h {
                if !first {
                    out.push(' ');
                }
                out.push('z');
                first = false;
            }
            for _ in 0..m.children.len() {
                if !first {
                    out.push(' ');
                }
                paren_rec(spec, slots, out);
                first = false;
            }
            out.push(')');
        }
    }
}

fn json_rec(spec: &CombinatorialSpec, slots: &mut impl Iterator<Item = Slot>) -> Value {
    match slots.next() {
        None => Value::Null,
        Some(Slot::ALeaf) => json!({ "leaf": "A" }),
        Some(Slot::Node(id)) => {
            let m = spec.mono(id);
            let mut children: Vec<Value> = (0..m.h).map(|_| json!({ "leaf": "z" })).collect();
            for _ in 0..m.children.len() {
                children.push(json_rec(spec, slots));
            }
            json!({ "color": m.color, "children": children })
        }
    }
}

pub fn tree_paren(spec: &CombinatorialSpec, tree: &ColoredTree) -> String {
    let mut out = String::new();
    paren_rec(spec, &mut tree.nodes.iter().map(|&id| Slot::Node(id)), &mut out);
    out
}

pub fn bridge_paren(spec: &CombinatorialSpec, list: &SubtreeList) -> String {
    let parts: Vec<String> = list
        .iter()
        .map(|t| {
            let mut s = String::new();
            paren_rec(spec, &mut t.nodes.iter().copied(), &mut s);
            s
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

pub fn tree_json(spec: &CombinatorialSpec, tree: &ColoredTree) -> Value {
    json_rec(spec, &mut tree.nodes.iter().map(|&id| Slot::Node(id)))
}

pub fn bridge_json(spec: &CombinatorialSpec, list: &SubtreeList) -> Value {
    let parts: Vec<Value> = list.iter().map(|t| json_rec(spec, &mut t.nodes.iter().copied())).collect();
    json!({ "subtrees": parts })
}

pub fn structure_line(spec: &CombinatorialSpec, s: &Structure, format: Format) -> String {
    match (s, format) {
        (Structure::Excursion(t), Format::TreeParen) => tree_paren(spec, t),
        (Structure::Excursion(t), Format::Jsonl) => tree_json(spec, t).to_string(),
        (Structure::Bridge(b), Format::TreeParen) => bridge_paren(spec, b),
        (Structure::Bridge(b), Format::Jsonl) => bridge_json(spec, b).to_string(),
    }
}

pub fn toy_line(b: &ToyBridge, format: Format) -> String {
    match format {
        Format::TreeParen => b
            .steps
            .iter()
            .map(|&s| match s {
                1 => '+',
                0 => '0',
                _ => '-',
            })
            .collect(),
        Format::Jsonl => json!({ "steps": b.steps }).to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeParseError {
    #[error("malformed tree at byte {0}")]
    Malformed(usize),
    #[error("no monomial of colour {color} with {h} z-leaves and children {children:?}")]
    NoMonomial { color: u16, h: u32, children: Vec<u16> },
}

/// Reads a `tree-paren` tree back.
pub fn parse_tree_paren(spec: &CombinatorialSpec, text: &str) -> Result<ColoredTree, TreeParseError> {
    let mut index: HashMap<(u16, u32, Vec<u16>), MonoId> = HashMap::new();
    for id in (0..spec.num_monos() as u32).map(MonoId) {
        let m = spec.mono(id);
        index.insert((m.color, m.h, m.children.clone()), id);
    }
    let bytes = text.trim().as_bytes();
    let mut pos = 0;
    let mut nodes = Vec::new();
    node(bytes, &mut pos, &index, &mut nodes)?;
    if pos != bytes.len() {
        return Err(TreeParseError::Malformed(pos));
    }
    Ok(ColoredTree::new(nodes))
}

type Index = HashMap<(u16, u32, Vec<u16>), MonoId>;

/// Parses one node into `out` (preorder) and returns its colour.
fn node(b: &[u8], pos: &mut usize, index: &Index, out: &mut Vec<MonoId>) -> Result<u16, TreeParseError> {
    let start = *pos;
    while *pos < b.len() && b[*pos].is_ascii_digit() {
        *pos += 1;
    }
    let color: u16 = std::str::from_utf8(&b[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or(TreeParseError::Malformed(start))?;
    if b.get(*pos) != Some(&b'(') {
        return Err(TreeParseError::Malformed(*pos));
    }
    *pos += 1;
    let slot = out.len();
    out.push(MonoId(0));
    let mut h = 0;
    let mut children = Vec::new();
    loop {
        while b.get(*pos) == Some(&b' ') {
            *pos += 1;
        }
        match b.get(*pos) {
            Some(b')') => {
                *pos += 1;
                break;
            }
            Some(b'z') => {
                h += 1;
                *pos += 1;
            }
            Some(c) if c.is_ascii_digit() => children.push(node(b, pos, index, out)?),
            _ => return Err(TreeParseError::Malformed(*pos)),
        }
    }
    let key = (color, h, children);
    out[slot] = *index.get(&key).ok_or(TreeParseError::NoMonomial { color, h, children: key.2.clone() })?;
    Ok(color)
}
