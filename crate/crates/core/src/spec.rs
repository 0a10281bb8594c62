//! Polynomial systems `Y = Φ(z, Y)` with positive rational coefficients.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::Error;

/// One term `φ z^h Π y_β^{k_β}` of a production.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub coeff: BigRational,
    pub h: u32,
    pub k: Vec<u32>,
}

impl Monomial {
    pub fn new(coeff: BigRational, h: u32, k: Vec<u32>) -> Self {
        Monomial { coeff, h, k }
    }

    /// `φ = 1` shorthand.
    pub fn unit(h: u32, k: Vec<u32>) -> Self {
        Monomial::new(BigRational::from_integer(1.into()), h, k)
    }

    pub fn degree(&self) -> u32 {
        self.h + self.k.iter().sum::<u32>()
    }

    pub fn arity(&self) -> u32 {
        self.k.iter().sum()
    }
}

/// Canonical term order: total degree ascending, then `h` descending, then `k`
/// lexicographically descending.
pub fn canonical_order(a: &Monomial, b: &Monomial) -> Ordering {
    a.degree()
        .cmp(&b.degree())
        .then(b.h.cmp(&a.h))
        .then_with(|| b.k.cmp(&a.k))
}

/// Global monomial index into [`CombinatorialSpec::mono`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonoId(pub u32);

/// Flattened per-monomial data used by the samplers.
#[derive(Clone, Debug)]
pub struct MonoInfo {
    pub color: u16,
    pub h: u32,
    /// Colours of the non-`z` children, in canonical order (colour 0 first).
    pub children: Vec<u16>,
    pub coeff: f64,
    pub ln_coeff: f64,
    pub exact: BigRational,
    pub k: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct CombinatorialSpec {
    symbols: Vec<String>,
    productions: Vec<Vec<Monomial>>,
    monos: Vec<MonoInfo>,
    offsets: Vec<u32>,
}

impl PartialEq for CombinatorialSpec {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols && self.productions == other.productions
    }
}

impl Eq for CombinatorialSpec {}

impl CombinatorialSpec {
    /// Builds a spec, merging like terms and sorting each production canonically.
    ///
    /// Structural problems that make the system meaningless (arity mismatch, too many
    /// symbols) are errors; the semantic invariants are checked by [`validate_spec`].
    pub fn new(symbols: Vec<String>, productions: Vec<Vec<Monomial>>) -> Result<Self, Error> {
        let m1 = symbols.len();
        if m1 == 0 {
            return Err(Error::InvalidSpec("no symbols".into()));
        }
        if m1 > u16::MAX as usize {
            return Err(Error::InvalidSpec("too many symbols".into()));
        }
        if productions.len() != m1 {
            return Err(Error::InvalidSpec(format!(
                "{} symbols but {} productions",
                m1,
                productions.len()
            )));
        }
        let mut merged = Vec::with_capacity(m1);
        for (a, prod) in productions.into_iter().enumerate() {
            let mut out: Vec<Monomial> = Vec::with_capacity(prod.len());
            for mono in prod {
                if mono.k.len() != m1 {
                    return Err(Error::InvalidSpec(format!(
                        "monomial of {} has {} exponents, expected {}",
                        symbols[a],
                        mono.k.len(),
                        m1
                    )));
                }
                match out.iter_mut().find(|o| o.h == mono.h && o.k == mono.k) {
                    Some(o) => o.coeff += mono.coeff,
                    None => out.push(mono),
                }
            }
            out.sort_by(canonical_order);
            merged.push(out);
        }
        let mut monos = Vec::new();
        let mut offsets = Vec::with_capacity(m1 + 1);
        for (a, prod) in merged.iter().enumerate() {
            offsets.push(monos.len() as u32);
            for mono in prod {
                let mut children = Vec::with_capacity(mono.arity() as usize);
                for (b, &kb) in mono.k.iter().enumerate() {
                    children.extend(core::iter::repeat_n(b as u16, kb as usize));
                }
                let coeff = mono.coeff.to_f64().unwrap_or(f64::NAN);
                monos.push(MonoInfo {
                    color: a as u16,
                    h: mono.h,
                    children,
                    coeff,
                    ln_coeff: libm::log(coeff),
                    exact: mono.coeff.clone(),
                    k: mono.k.clone(),
                });
            }
        }
        offsets.push(monos.len() as u32);
        Ok(CombinatorialSpec { symbols, productions: merged, monos, offsets })
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol_name(&self, a: usize) -> &str {
        &self.symbols[a]
    }

    pub fn productions(&self, a: usize) -> &[Monomial] {
        &self.productions[a]
    }

    pub fn mono(&self, id: MonoId) -> &MonoInfo {
        &self.monos[id.0 as usize]
    }

    pub fn num_monos(&self) -> usize {
        self.monos.len()
    }

    /// Global ids of the monomials of colour `a`.
    pub fn monos_of(&self, a: usize) -> impl Iterator<Item = MonoId> + Clone {
        (self.offsets[a]..self.offsets[a + 1]).map(MonoId)
    }

    pub fn mono_id(&self, a: usize, j: usize) -> MonoId {
        MonoId(self.offsets[a] + j as u32)
    }

    /// `max_j (k_j + h)` over all monomials; the largest node degree.
    pub fn max_degree(&self) -> u32 {
        self.monos.iter().map(|m| m.h + m.children.len() as u32).max().unwrap_or(0)
    }

    /// `Φ(z, y)` componentwise.
    pub fn eval(&self, z: f64, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_symbols()];
        for m in &self.monos {
            out[m.color as usize] += mono_value(m, z, y);
        }
        out
    }

    /// Jacobian `K_{αβ} = ∂Φ_α/∂y_β`.
    pub fn jacobian(&self, z: f64, y: &[f64]) -> crate::linalg::Matrix {
        let n = self.num_symbols();
        let mut k = crate::linalg::Matrix::zeros(n);
        for m in &self.monos {
            for b in 0..n {
                if m.k[b] > 0 {
                    k[(m.color as usize, b)] += mono_partial(m, z, y, 0, &[b]);
                }
            }
        }
        k
    }

    /// `∂Φ/∂z` componentwise.
    pub fn dz(&self, z: f64, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_symbols()];
        for m in &self.monos {
            if m.h > 0 {
                out[m.color as usize] += mono_partial(m, z, y, 1, &[]);
            }
        }
        out
    }

    /// Symbols reachable from colour 0 in the dependency digraph (colour 0 included).
    pub fn reachable(&self) -> Vec<bool> {
        let n = self.num_symbols();
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0usize];
        while let Some(a) = stack.pop() {
            for mono in &self.productions[a] {
                for (b, &kb) in mono.k.iter().enumerate() {
                    if kb > 0 && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        seen
    }

    /// The same system restricted to symbols reachable from colour 0.
    pub fn restricted_to_reachable(&self) -> CombinatorialSpec {
        let keep = self.reachable();
        if keep.iter().all(|&b| b) {
            return self.clone();
        }
        let idx: Vec<usize> = (0..keep.len()).filter(|&a| keep[a]).collect();
        let symbols = idx.iter().map(|&a| self.symbols[a].clone()).collect();
        let productions = idx
            .iter()
            .map(|&a| {
                self.productions[a]
                    .iter()
                    .map(|m| Monomial::new(m.coeff.clone(), m.h, idx.iter().map(|&b| m.k[b]).collect()))
                    .collect()
            })
            .collect();
        CombinatorialSpec::new(symbols, productions).expect("restriction of a well-formed spec")
    }
}

/// `∂^dz_order/∂z ∂/∂y_{dy[0]} ∂/∂y_{dy[1]} … (φ z^h Π y^k)`.
pub(crate) fn mono_partial(m: &MonoInfo, z: f64, y: &[f64], dz_order: u32, dy: &[usize]) -> f64 {
    let mut v = m.coeff * falling_pow(z, m.h, dz_order);
    if v == 0.0 {
        return 0.0;
    }
    for (b, &kb) in m.k.iter().enumerate() {
        let d = dy.iter().filter(|&&c| c == b).count() as u32;
        if kb == 0 && d == 0 {
            continue;
        }
        v *= falling_pow(y[b], kb, d);
        if v == 0.0 {
            return 0.0;
        }
    }
    v
}

#[inline]
pub(crate) fn mono_value(m: &MonoInfo, z: f64, y: &[f64]) -> f64 {
    let mut v = m.coeff * powi(z, m.h);
    for (b, &kb) in m.k.iter().enumerate() {
        if kb > 0 {
            v *= powi(y[b], kb);
        }
    }
    v
}

/// `d^d/dx^d x^e`.
fn falling_pow(x: f64, e: u32, d: u32) -> f64 {
    if d > e {
        return 0.0;
    }
    let mut c = 1.0;
    for i in 0..d {
        c *= (e - i) as f64;
    }
    c * powi(x, e - d)
}

#[inline]
pub(crate) fn powi(x: f64, e: u32) -> f64 {
    let mut r = 1.0;
    let mut b = x;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            r *= b;
        }
        b *= b;
        e >>= 1;
    }
    r
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NonPositiveCoefficient { symbol: usize, monomial: usize },
    NoProductions { symbol: usize },
    EmptyProduction { symbol: usize },
    LinearPartNotNilpotent,
    NotIrreducible { symbol: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveCoefficient { symbol, monomial } => {
                write!(f, "monomial {monomial} of symbol {symbol} has a non-positive coefficient")
            }
            Violation::NoProductions { symbol } => write!(f, "symbol {symbol} has no productions"),
            Violation::EmptyProduction { symbol } => {
                write!(f, "symbol {symbol} has an empty production (no z and no symbols)")
            }
            Violation::LinearPartNotNilpotent => {
                write!(f, "the linear part of Φ(0, Y) is not nilpotent")
            }
            Violation::NotIrreducible { symbol } => {
                write!(f, "reachable symbol {symbol} cannot reach the target symbol")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_spec(spec: &CombinatorialSpec) -> ValidationReport {
    let n = spec.num_symbols();
    let mut violations = Vec::new();
    for a in 0..n {
        let prod = spec.productions(a);
        if prod.is_empty() {
            violations.push(Violation::NoProductions { symbol: a });
        }
        for (j, m) in prod.iter().enumerate() {
            if !m.coeff.is_positive() || m.coeff.is_zero() {
                violations.push(Violation::NonPositiveCoefficient { symbol: a, monomial: j });
            }
            if m.h == 0 && m.arity() == 0 {
                violations.push(Violation::EmptyProduction { symbol: a });
            }
        }
    }

    // Boolean pattern of the linear part of Φ(0, Y); nilpotent iff L^n = 0.
    let mut l = vec![false; n * n];
    for a in 0..n {
        for m in spec.productions(a) {
            if m.h == 0 && m.arity() == 1 {
                let b = m.k.iter().position(|&x| x == 1).unwrap();
                l[a * n + b] = true;
            }
        }
    }
    let mut p = l.clone();
    for _ in 1..n {
        p = bool_mul(&p, &l, n);
    }
    if p.iter().any(|&x| x) {
        violations.push(Violation::LinearPartNotNilpotent);
    }

    let reach = spec.reachable();
    let back = reaches_target(spec);
    for a in 0..n {
        if reach[a] && !back[a] {
            violations.push(Violation::NotIrreducible { symbol: a });
        }
    }
    ValidationReport { violations }
}

fn bool_mul(a: &[bool], b: &[bool], n: usize) -> Vec<bool> {
    let mut c = vec![false; n * n];
    for i in 0..n {
        for k in 0..n {
            if a[i * n + k] {
                for j in 0..n {
                    c[i * n + j] |= b[k * n + j];
                }
            }
        }
    }
    c
}

/// Symbols from which colour 0 is reachable through a path of length at least 1
/// (for colour 0 itself this means colour 0 lies on a cycle).
fn reaches_target(spec: &CombinatorialSpec) -> Vec<bool> {
    let n = spec.num_symbols();
    let mut ok = vec![false; n];
    let mut changed = true;
    while changed {
        changed = false;
        for a in 0..n {
            if ok[a] {
                continue;
            }
            let hit = spec
                .productions(a)
                .iter()
                .any(|m| m.k.iter().enumerate().any(|(b, &kb)| kb > 0 && (b == 0 || ok[b])));
            if hit {
                ok[a] = true;
                changed = true;
            }
        }
    }
    ok
}
