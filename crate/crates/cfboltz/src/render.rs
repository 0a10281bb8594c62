//! Canonical text form of a specification.

use std::fmt::Write;

use cfboltz_core::{CombinatorialSpec, Monomial};
use num_traits::One;

fn power(out: &mut String, name: &str, e: u32) {
    if !out.is_empty() && !out.ends_with(' ') {
        out.push(' ');
    }
    out.push_str(name);
    if e > 1 {
        let _ = write!(out, "^{e}");
    }
}

pub fn render_monomial(spec: &CombinatorialSpec, m: &Monomial) -> String {
    let mut out = String::new();
    if !m.coeff.is_one() {
        let _ = write!(out, "{}", m.coeff);
    }
    if m.h > 0 {
        power(&mut out, "z", m.h);
    }
    for (b, &e) in m.k.iter().enumerate() {
        if e > 0 {
            power(&mut out, spec.symbol_name(b), e);
        }
    }
    out
}

/// One line `S = t1 + t2 + …;` per symbol, in declaration order, terms in canonical order.
pub fn render_spec(spec: &CombinatorialSpec) -> String {
    let mut out = String::new();
    for a in 0..spec.num_symbols() {
        let terms: Vec<String> = spec.productions(a).iter().map(|m| render_monomial(spec, m)).collect();
        let _ = writeln!(out, "{} = {};", spec.symbol_name(a), terms.join(" + "));
    }
    out
}
