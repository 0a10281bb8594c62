//! Rectangle subdivisions drawn from `rhv` trees.
//!
//! `R`, `H`, `V` have colours 0, 1, 2. A `z` leaf is an undivided rectangle, `H²` cuts
//! horizontally into two, `V²` cuts vertically into two and `R⁴` cuts into quadrants.

use std::fmt::Write;

use cfboltz_core::{ColoredTree, CombinatorialSpec};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SvgError {
    #[error("the SVG renderer only supports the rhv model")]
    UnsupportedModel,
}

const SIZE: f64 = 512.0;

fn is_rhv(spec: &CombinatorialSpec) -> bool {
    spec.symbols() == ["R", "H", "V"]
}

pub fn render_rhv(spec: &CombinatorialSpec, tree: &ColoredTree) -> Result<String, SvgError> {
    if !is_rhv(spec) {
        return Err(SvgError::UnsupportedModel);
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<g fill="none" stroke="black" stroke-width="0.5">"#);
    let mut pos = 0;
    draw(spec, tree, &mut pos, (0.0, 0.0, SIZE, SIZE), &mut out);
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

fn draw(spec: &CombinatorialSpec, tree: &ColoredTree, pos: &mut usize, r: (f64, f64, f64, f64), out: &mut String) {
    let m = spec.mono(tree.nodes[*pos]);
    *pos += 1;
    let (x, y, w, h) = r;
    let parts: Vec<(f64, f64, f64, f64)> = match m.children.len() {
        0 => {
            let _ = writeln!(out, r#"<rect x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{h:.3}"/>"#);
            return;
        }
        2 if m.children[0] == 1 => vec![(x, y, w, h / 2.0), (x, y + h / 2.0, w, h / 2.0)],
        2 => vec![(x, y, w / 2.0, h), (x + w / 2.0, y, w / 2.0, h)],
        _ => {
            let (hw, hh) = (w / 2.0, h / 2.0);
            vec![(x, y, hw, hh), (x + hw, y, hw, hh), (x, y + hh, hw, hh), (x + hw, y + hh, hw, hh)]
        }
    };
    for p in parts {
        draw(spec, tree, pos, p, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cfboltz_core::models;
    use cfboltz_core::oracle::enumerate_structures;

    #[test]
    fn one_rect_per_leaf() {
        let spec = models::rhv();
        for (t, _) in enumerate_structures(&spec, 4, 1000).unwrap() {
            let s = render_rhv(&spec, &t).unwrap();
            assert_eq!(s.matches("<rect").count(), 4);
        }
        let b = models::binary_trees();
        let t = &enumerate_structures(&b, 1, 10).unwrap()[0].0;
        assert_eq!(render_rhv(&b, t), Err(SvgError::UnsupportedModel));
    }
}
