//! Boltzmann sampling of subtrees at tilted points and the two-point mixture measure.

use alloc::vec;
use alloc::vec::Vec;

use crate::catalog::SubtreeCatalog;
use crate::critical::{solve_reduced_system, CriticalData, DriftFunction, DEFAULT_TOL};
use crate::random::{cumulative_thresholds, BitSource};
use crate::spec::{mono_value, CombinatorialSpec, MonoId};
use crate::special::ln_cosh;
use crate::tree::{Slot, SubtreeList};
use crate::Error;

/// Default bound on the number of nodes of a single subtree.
pub const NODE_CAP: usize = 1_000_000_000;

/// Per-colour monomial distributions at a point `(z, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OffspringTable {
    cum: Vec<Vec<u128>>,
    ids: Vec<Vec<MonoId>>,
}

impl OffspringTable {
    /// Monomial `m` of colour `a` gets probability `w_m z^h y^k / Φ_a(z, y)`.
    pub fn new(spec: &CombinatorialSpec, z: f64, y: &[f64]) -> Self {
        let n = spec.num_symbols();
        let mut cum = Vec::with_capacity(n);
        let mut ids = Vec::with_capacity(n);
        for a in 0..n {
            let list: Vec<MonoId> = spec.monos_of(a).collect();
            let w: Vec<f64> = list.iter().map(|&id| mono_value(spec.mono(id), z, y)).collect();
            cum.push(cumulative_thresholds(&w));
            ids.push(list);
        }
        OffspringTable { cum, ids }
    }

    #[inline]
    pub fn sample(&self, color: usize, bits: &mut BitSource) -> MonoId {
        self.ids[color][bits.discrete_thresholds(&self.cum[color])]
    }
}

/// Appends one Boltzmann subtree to `list` and returns its leaf counts.
///
/// The root has colour 0; every further colour-0 position becomes an A-leaf.
pub fn sample_subtree_into(
    spec: &CombinatorialSpec,
    table: &OffspringTable,
    list: &mut SubtreeList,
    stack: &mut Vec<u16>,
    bits: &mut BitSource,
    cap: usize,
) -> Result<(u32, u32), Error> {
    stack.clear();
    stack.push(0);
    let (mut v, mut l) = (0u32, 0u32);
    let mut count = 0usize;
    let mut root = true;
    while let Some(c) = stack.pop() {
        count += 1;
        if count > cap {
            list.discard_open();
            return Err(Error::DepthRunaway { cap });
        }
        if c == 0 && !root {
            list.arena().push(Slot::ALeaf);
            l += 1;
            continue;
        }
        root = false;
        let id = table.sample(c as usize, bits);
        let m = spec.mono(id);
        list.arena().push(Slot::Node(id));
        v += m.h;
        stack.extend(m.children.iter().rev());
    }
    list.close(v, l);
    Ok((v, l))
}

/// One component of the mixture: the Boltzmann measure at `(ζ e^ξ, θ e^{ξ v0})`.
#[derive(Clone, Debug, PartialEq)]
pub struct TiltedPoint {
    pub xi: f64,
    pub z: f64,
    pub u: f64,
    /// `A(z, u)`.
    pub a: f64,
    /// `f(ξ)`.
    pub f: f64,
    pub table: OffspringTable,
}

impl TiltedPoint {
    pub fn new(spec: &CombinatorialSpec, drift: &DriftFunction<'_>, xi: f64) -> Result<Self, Error> {
        let (z, u) = drift.point(xi);
        let sol = solve_reduced_system(spec, z, u, DEFAULT_TOL)?;
        Ok(TiltedPoint { xi, z, u, a: sol.a, f: drift.from_a(xi, sol.a), table: OffspringTable::new(spec, z, &sol.y) })
    }
}

/// The balanced mixture `π+ μ≠_ξ + π- μ≠_{-ξ}` with `π± ∝ e^{f(±ξ)}`, whose density with
/// respect to the critical measure conditioned off the base class is
/// `F(ũ) = cosh(ξ ũ) / coshNorm`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureMeasure {
    pub xi: f64,
    pub points: Vec<TiltedPoint>,
    /// `ln((e^{f+} + e^{f-}) / 2)`, clamped at 0.
    pub ln_cosh_norm: f64,
    pi_cum: Vec<u128>,
    v0: u32,
}

impl MixtureMeasure {
    /// The critical measure itself (`ξ = 0`).
    pub fn critical(spec: &CombinatorialSpec, crit: &CriticalData, catalog: &SubtreeCatalog) -> Result<Self, Error> {
        let drift = DriftFunction::new(spec, crit, catalog)?;
        let p = TiltedPoint::new(spec, &drift, 0.0)?;
        Ok(MixtureMeasure { xi: 0.0, points: vec![p], ln_cosh_norm: 0.0, pi_cum: vec![1u128 << 64], v0: catalog.v0 })
    }

    /// The mixture at exactly `ξ`; fails if `(ζ e^ξ, θ e^{ξ v0})` is outside the ball.
    pub fn new(spec: &CombinatorialSpec, crit: &CriticalData, catalog: &SubtreeCatalog, xi: f64) -> Result<Self, Error> {
        if xi == 0.0 {
            return Self::critical(spec, crit, catalog);
        }
        let drift = DriftFunction::new(spec, crit, catalog)?;
        let plus = TiltedPoint::new(spec, &drift, xi)?;
        let minus = TiltedPoint::new(spec, &drift, -xi)?;
        let (fp, fm) = (plus.f, minus.f);
        let hi = fp.max(fm);
        let sum = libm::exp(fp - hi) + libm::exp(fm - hi);
        let ln_cosh_norm = (hi + libm::log(sum) - core::f64::consts::LN_2).max(0.0);
        let pi_cum = cumulative_thresholds(&[libm::exp(fp - hi), libm::exp(fm - hi)]);
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::NoConvergence { iterations: 0 });
        }
        Ok(MixtureMeasure { xi, points: vec![plus, minus], ln_cosh_norm, pi_cum, v0: catalog.v0 })
    }

    /// Like [`MixtureMeasure::new`], halving `ξ` until the point is admissible and falling
    /// back to the critical measure.
    pub fn adaptive(spec: &CombinatorialSpec, crit: &CriticalData, catalog: &SubtreeCatalog, xi: f64) -> Result<Self, Error> {
        let mut x = xi;
        for _ in 0..40 {
            match Self::new(spec, crit, catalog, x) {
                Ok(m) => return Ok(m),
                Err(Error::OutsideSubcriticalBall { .. }) | Err(Error::NoConvergence { .. }) => x *= 0.5,
                Err(e) => return Err(e),
            }
        }
        Self::critical(spec, crit, catalog)
    }

    pub fn is_critical(&self) -> bool {
        self.xi == 0.0
    }

    /// `ln F(ũ)`.
    #[inline]
    pub fn log_density(&self, u_tilde: i64) -> f64 {
        ln_cosh(self.xi * u_tilde as f64) - self.ln_cosh_norm
    }

    /// Probability of the `+ξ` component.
    pub fn pi_plus(&self) -> f64 {
        self.pi_cum[0] as f64 / 18_446_744_073_709_551_616.0
    }

    /// Appends one subtree drawn from the mixture conditioned off the base class.
    pub fn sample_into(
        &self,
        spec: &CombinatorialSpec,
        list: &mut SubtreeList,
        stack: &mut Vec<u16>,
        bits: &mut BitSource,
        cap: usize,
    ) -> Result<(u32, u32), Error> {
        let a = bits.discrete_thresholds(&self.pi_cum);
        let table = &self.points[a].table;
        loop {
            let (v, l) = sample_subtree_into(spec, table, list, stack, bits, cap)?;
            if v == self.v0 && l == 0 {
                list.truncate_last();
                continue;
            }
            return Ok((v, l));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::compute_catalog;
    use crate::critical::solve_characteristic;
    use crate::models;

    #[test]
    fn binary_subtrees_are_valid() {
        let spec = models::binary_trees();
        let crit = solve_characteristic(&spec, DEFAULT_TOL).unwrap();
        let cat = compute_catalog(&spec).unwrap();
        let mix = MixtureMeasure::new(&spec, &crit, &cat, 0.05).unwrap();
        let mut bits = BitSource::new(3);
        let mut list = SubtreeList::new();
        let mut stack = Vec::new();
        for _ in 0..1000 {
            mix.sample_into(&spec, &mut list, &mut stack, &mut bits, NODE_CAP).unwrap();
        }
        assert_eq!(list.len(), 1000);
        for t in list.iter() {
            assert!(t.is_valid(&spec));
            assert_eq!((t.v, t.l), (0, 2));
        }
    }

    #[test]
    fn mixture_weights_and_density() {
        let spec = models::rhv();
        let crit = solve_characteristic(&spec, DEFAULT_TOL).unwrap();
        let cat = compute_catalog(&spec).unwrap();
        let mix = MixtureMeasure::new(&spec, &crit, &cat, 0.1).unwrap();
        let (fp, fm) = (mix.points[0].f, mix.points[1].f);
        let pi = libm::exp(fp) / (libm::exp(fp) + libm::exp(fm));
        assert!((mix.pi_plus() - pi).abs() < 1e-15);
        assert!(mix.ln_cosh_norm > 0.0);
        assert!(mix.log_density(0) < 0.0);
        assert_eq!(mix.log_density(7), mix.log_density(-7));
    }

    #[test]
    fn rhv_mean_step_matches_drift() {
        // Under the critical measure conditioned off the base class, E ũ = f'(0) = v̄ / A≠.
        let spec = models::rhv();
        let crit = solve_characteristic(&spec, DEFAULT_TOL).unwrap();
        let cat = compute_catalog(&spec).unwrap();
        let d = crate::critical::derived_constants(&spec, &crit, &cat).unwrap();
        let mix = MixtureMeasure::critical(&spec, &crit, &cat).unwrap();
        let mut bits = BitSource::new(11);
        let mut list = SubtreeList::new();
        let mut stack = Vec::new();
        let n = 200_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            list.clear();
            let (v, l) = mix.sample_into(&spec, &mut list, &mut stack, &mut bits, NODE_CAP).unwrap();
            let u = v as f64 + (l as f64 - 1.0);
            sum += u;
            sum2 += u * u;
            assert!(list.get(0).is_valid(&spec));
        }
        let mean = sum / n as f64;
        let sd = libm::sqrt(sum2 / n as f64 - mean * mean);
        let want = d.vbar / d.aneq;
        assert!((mean - want).abs() < 5.0 * sd / libm::sqrt(n as f64), "{mean} vs {want}");
    }

    #[test]
    fn adaptive_falls_back() {
        let spec = models::rhv();
        let crit = solve_characteristic(&spec, DEFAULT_TOL).unwrap();
        let cat = compute_catalog(&spec).unwrap();
        let mix = MixtureMeasure::adaptive(&spec, &crit, &cat, 50.0).unwrap();
        assert!(mix.xi < 50.0);
        assert!(MixtureMeasure::new(&spec, &crit, &cat, 50.0).is_err());
    }

    #[test]
    fn node_cap_reports_runaway() {
        let spec = models::rhv();
        let crit = solve_characteristic(&spec, DEFAULT_TOL).unwrap();
        let cat = compute_catalog(&spec).unwrap();
        let mix = MixtureMeasure::critical(&spec, &crit, &cat).unwrap();
        let mut bits = BitSource::new(1);
        let mut list = SubtreeList::new();
        let mut stack = Vec::new();
        let mut saw = false;
        for _ in 0..2000 {
            match mix.sample_into(&spec, &mut list, &mut stack, &mut bits, 3) {
                Err(Error::DepthRunaway { cap: 3 }) => saw = true,
                Err(e) => panic!("{e:?}"),
                Ok(_) => {}
            }
        }
        assert!(saw);
        for t in list.iter() {
            assert!(t.is_valid(&spec));
        }
    }
}
