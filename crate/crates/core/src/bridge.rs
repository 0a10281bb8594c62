//! The accelerated sampler: drifted walk to the landing diagonal, certified acceptance,
//! completion with base subtrees, shuffle and rotation.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigUint;

use crate::catalog::{compute_catalog, SubtreeCatalog};
use crate::critical::{derived_constants, solve_characteristic, CriticalData, DerivedConstants, DEFAULT_TOL};
use crate::cyclic::{assemble_tree, rotate_to_excursion};
use crate::hp::{to_f64, Float, Hp};
use crate::random::{BitSource, LazyUniform};
use crate::shuffle::bbhl_shuffle;
use crate::special::{digamma, ln_cosh, ln_gamma_bounded, trigamma, EPS};
use crate::spec::{validate_spec, CombinatorialSpec};
use crate::subtree::{MixtureMeasure, NODE_CAP};
use crate::tree::{ColoredTree, SubtreeList};
use crate::Error;

/// Default cap on walk attempts per sample.
pub const RESTART_BUDGET: u64 = 1_000_000;

/// Precision of the re-evaluation used when the double-precision decision is ambiguous.
pub const HP_BITS: usize = 256;

/// Below this `k` the digamma difference is summed directly.
const DIRECT_SUM_K: u64 = 32;

/// Tilt search: grid points `ε_nom 2^{-j/2}` and golden-section rounds.
const TUNE_GRID: usize = 8;
const TUNE_GOLDEN: usize = 6;

/// Absolute slack subtracted from `ln K_n`.
const PLAN_SLACK: f64 = 1e-12;

static BREACHES: AtomicU64 = AtomicU64::new(0);

/// Number of certification failures observed by this process.
pub fn invariant_breaches() -> u64 {
    BREACHES.load(Ordering::Relaxed)
}

/// Position of the first-phase walk relative to the landing diagonal
/// `D_n = {(i, j): j >= -1, i + v0 j = n - v0}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkGeometry {
    pub n: u64,
    pub n_prime: i64,
    pub v0: u32,
    pub i: i64,
    pub j: i64,
    /// `i + v0 j`.
    pub u_total: i64,
}

impl WalkGeometry {
    pub fn new(n: u64, v0: u32) -> Self {
        WalkGeometry { n, n_prime: n as i64 - v0 as i64, v0, i: 0, j: 0, u_total: 0 }
    }

    pub fn reset(&mut self) {
        self.i = 0;
        self.j = 0;
        self.u_total = 0;
    }

    /// Adds the step of a subtree with `v` z-leaves and `l` A-leaves; returns its `ũ`.
    #[inline]
    pub fn step(&mut self, v: u32, l: u32) -> i64 {
        let dj = l as i64 - 1;
        let u = v as i64 + self.v0 as i64 * dj;
        self.i += v as i64;
        self.j += dj;
        self.u_total += u;
        u
    }

    #[inline]
    pub fn in_final_region(&self) -> bool {
        self.u_total >= self.n_prime
    }

    #[inline]
    pub fn on_landing_diagonal(&self) -> bool {
        self.u_total == self.n_prime && self.j >= -1
    }
}

/// `m*(k)`: the nonnegative root of `ψ(m + k) - ψ(m + 1) + ln A0 = 0`, or 0.
pub fn solve_mstar(k: u64, a0: f64, tol: f64) -> f64 {
    mstar_newton(k, libm::log(a0), 0.0, tol).0
}

/// `(ψ(m + k) - ψ(m + 1), its derivative in m)`.
fn psi_diff(k: u64, m: f64) -> (f64, f64) {
    if k <= DIRECT_SUM_K {
        let mut s = 0.0;
        let mut d = 0.0;
        for i in 1..k {
            let x = 1.0 / (m + i as f64);
            s += x;
            d -= x * x;
        }
        (s, d)
    } else {
        let kf = k as f64;
        (digamma(m + kf) - digamma(m + 1.0), trigamma(m + kf) - trigamma(m + 1.0))
    }
}

/// Newton from `start`; returns `(m*, |last step|, h(m*))`.
fn mstar_newton(k: u64, ln_a0: f64, start: f64, tol: f64) -> (f64, f64, f64) {
    if k <= 1 {
        return (0.0, 0.0, 0.0);
    }
    let h0 = psi_diff(k, 0.0).0 + ln_a0;
    if h0 <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let mut m = start.max(0.0);
    let mut last = f64::INFINITY;
    let mut h = h0;
    for _ in 0..200 {
        let (s, d) = psi_diff(k, m);
        h = s + ln_a0;
        if d >= 0.0 {
            break;
        }
        let step = -h / d;
        let next = (m + step).max(0.0);
        last = (next - m).abs();
        m = next;
        if last <= tol * m.max(1.0) {
            h = psi_diff(k, m).0 + ln_a0;
            break;
        }
    }
    (m, last, h)
}

/// Constants of the certified acceptance rate for one size `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct AcceptancePlan {
    pub n: u64,
    pub n_prime: u64,
    pub v0: u32,
    /// Tilt of the mixture actually used.
    pub xi: f64,
    pub a0: f64,
    pub aneq: f64,
    pub ln_a0: f64,
    pub ln_aneq: f64,
    pub ln_cosh_norm: f64,
    /// `ln C = n' ln coshNorm`.
    pub log_c: f64,
    /// `ln K_n` used by the sampler: minus the maximum over `k` of
    /// `G(k) = g(k) + k ln coshNorm`.
    pub log_kn: f64,
    /// `ln K_n` with the factor `coshNorm^k` bounded by `C` uniformly in `k`:
    /// `-ln C - max_k g(k)`. Never larger than `log_kn`.
    pub log_kn_uniform: f64,
    /// Argmax of `G` and `m*` there.
    pub k_star: u64,
    pub m_star: f64,
    /// `max_k G(k)` and the error bound inflating it.
    pub max_g: f64,
    pub max_g_err: f64,
    /// Argmax of `g` and `max_k g(k)`.
    pub k_star_uniform: u64,
    pub max_g_uniform: f64,
    /// Local maxima of `g` along `k` (changes of `Δg` from positive to negative, ignoring
    /// differences below `1e-9`).
    pub peaks: u32,
}

impl AcceptancePlan {
    pub fn kn(&self) -> f64 {
        libm::exp(self.log_kn)
    }

    /// `ln r_n` and an absolute error bound, for `k` first-phase steps with
    /// `Σ ln cosh(ξ ũ_j) = sum_ln_cosh` and `m` base subtrees.
    pub fn log_acceptance(&self, k: u64, m: u64, sum_ln_cosh: f64) -> (f64, f64) {
        let kf = k as f64;
        let mf = m as f64;
        let (g1, e1) = ln_gamma_bounded(kf + mf);
        let (g2, e2) = ln_gamma_bounded(kf + 1.0);
        let (g3, e3) = if m == 0 { (0.0, 0.0) } else { ln_gamma_bounded(mf + 1.0) };
        let ta = kf * self.ln_aneq;
        let tb = mf * self.ln_a0;
        let tc = kf * self.ln_cosh_norm;
        let log_r = self.log_kn + g1 - g2 - g3 + ta + tb - sum_ln_cosh + tc;
        let mag = self.log_kn.abs() + g1.abs() + g2.abs() + g3.abs() + ta.abs() + tb.abs() + tc.abs() + sum_ln_cosh;
        let err = e1 + e2 + e3 + 8.0 * EPS * mag + (8.0 + kf) * EPS * sum_ln_cosh;
        (log_r, err)
    }

    /// `ln r_n` from the list of diagonal indices of the first-phase steps.
    pub fn log_acceptance_steps(&self, u_tildes: &[i64], m: u64) -> (f64, f64) {
        let s: f64 = u_tildes.iter().map(|&u| ln_cosh(self.xi * u as f64)).sum();
        self.log_acceptance(u_tildes.len() as u64, m, s)
    }

    /// `ln r_n` at `HP_BITS` precision, treating the stored constants as exact.
    pub fn log_acceptance_hp(&self, hp: &mut Hp, counts: &BTreeMap<i64, u64>, m: u64) -> Float {
        let k: u64 = counts.values().sum();
        let mut acc = hp.f(self.log_kn);
        let t = hp.ln_factorial(k + m - 1);
        acc = hp.add(&acc, &t);
        let t = hp.ln_factorial(k);
        acc = hp.sub(&acc, &t);
        let t = hp.ln_factorial(m);
        acc = hp.sub(&acc, &t);
        let t = hp.mul(&hp.u(k), &hp.f(self.ln_aneq));
        acc = hp.add(&acc, &t);
        let t = hp.mul(&hp.u(m), &hp.f(self.ln_a0));
        acc = hp.add(&acc, &t);
        let t = hp.mul(&hp.u(k), &hp.f(self.ln_cosh_norm));
        acc = hp.add(&acc, &t);
        let xi = hp.f(self.xi);
        for (&u, &c) in counts {
            let x = hp.mul(&xi, &hp.f(u as f64));
            let lc = hp.ln_cosh(&x);
            let t = hp.mul(&hp.u(c), &lc);
            acc = hp.sub(&acc, &t);
        }
        acc
    }
}

/// The value of the scan function and its error bound at `(k, m)`.
fn scan_term(k: u64, m: f64, ln_a0: f64, ln_aneq: f64, xi: f64, n_prime: u64) -> (f64, f64) {
    let kf = k as f64;
    let (g1, e1) = ln_gamma_bounded(kf + m);
    let (g2, e2) = ln_gamma_bounded(kf + 1.0);
    let (g3, e3) = ln_gamma_bounded(m + 1.0);
    let ta = kf * ln_aneq;
    let tb = m * ln_a0;
    let tc = kf * ln_cosh(xi * (n_prime as f64 / kf));
    let g = g1 - g2 - g3 + ta + tb - tc;
    let mag = g1.abs() + g2.abs() + g3.abs() + ta.abs() + tb.abs() + tc;
    (g, e1 + e2 + e3 + 10.0 * EPS * mag)
}

pub fn build_acceptance_plan(consts: &DerivedConstants, mix: &MixtureMeasure, n: u64) -> Result<AcceptancePlan, Error> {
    let v0 = consts.v0;
    if n <= v0 as u64 {
        return Err(Error::SizeTooSmall { n: n as usize, n_min: v0 as usize + 1 });
    }
    let np = n - v0 as u64;
    let ln_a0 = libm::log(consts.a0);
    let ln_aneq = libm::log(consts.aneq);
    let xi = mix.xi;
    let mut m = 0.0;
    let mut best = f64::NEG_INFINITY;
    let mut best_uniform = f64::NEG_INFINITY;
    let (mut k_star, mut m_star, mut max_g, mut max_g_err) = (1u64, 0.0, 0.0, 0.0);
    let (mut k_star_uniform, mut max_g_uniform) = (1u64, 0.0);
    let mut prev_g = f64::NAN;
    let mut prev_sign = 0i8;
    let mut peaks = 0u32;
    for k in 1..=np {
        let (mk, step, h) = mstar_newton(k, ln_a0, m, 1e-14);
        m = mk;
        let (g, mut e) = scan_term(k, m, ln_a0, ln_aneq, xi, np);
        if m > 0.0 {
            e += h.abs() * (step + 1e-12 * (1.0 + m));
        }
        let tc = k as f64 * mix.ln_cosh_norm;
        let big_g = g + tc;
        let big_e = e + 4.0 * EPS * (tc + big_g.abs());
        if big_g + big_e > best {
            best = big_g + big_e;
            k_star = k;
            m_star = m;
            max_g = big_g;
            max_g_err = big_e;
        }
        if g + e > best_uniform {
            best_uniform = g + e;
            k_star_uniform = k;
            max_g_uniform = g;
        }
        if k > 1 {
            let d = g - prev_g;
            let s = if d.abs() < 1e-9 { 0 } else if d > 0.0 { 1 } else { -1 };
            if s != 0 {
                if prev_sign == 1 && s == -1 {
                    peaks += 1;
                }
                prev_sign = s;
            }
        }
        prev_g = g;
    }
    let log_c = np as f64 * mix.ln_cosh_norm;
    let log_kn = -best - PLAN_SLACK - 4.0 * EPS * best.abs();
    let log_kn_uniform = -log_c - best_uniform - PLAN_SLACK - 4.0 * EPS * (log_c.abs() + best_uniform.abs());
    Ok(AcceptancePlan {
        n,
        n_prime: np,
        v0,
        xi,
        a0: consts.a0,
        aneq: consts.aneq,
        ln_a0,
        ln_aneq,
        ln_cosh_norm: mix.ln_cosh_norm,
        log_c,
        log_kn,
        log_kn_uniform,
        k_star,
        m_star,
        max_g,
        max_g_err,
        k_star_uniform,
        max_g_uniform,
        peaks,
    })
}

/// Output shape of [`BridgeSampler::sample_structure`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Bridge,
    Excursion,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Structure {
    Bridge(SubtreeList),
    Excursion(ColoredTree),
}

/// Counters accumulated over calls.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunStats {
    /// Walks started.
    pub attempts: u64,
    /// Walks that landed on the diagonal.
    pub reached: u64,
    pub accepted: u64,
    /// Sum of `r_n` over landed walks.
    pub r_sum: f64,
    /// First-phase subtrees drawn.
    pub subtrees: u64,
    /// Decisions settled at high precision.
    pub escalations: u64,
}

impl RunStats {
    pub fn merge(&mut self, o: &RunStats) {
        self.attempts += o.attempts;
        self.reached += o.reached;
        self.accepted += o.accepted;
        self.r_sum += o.r_sum;
        self.subtrees += o.subtrees;
        self.escalations += o.escalations;
    }
}

/// A validated specification with its critical data, catalog and derived constants.
#[derive(Clone, Debug)]
pub struct Analysis {
    spec: CombinatorialSpec,
    catalog: SubtreeCatalog,
    crit: CriticalData,
    consts: DerivedConstants,
}

impl Analysis {
    /// Restricts `spec` to the symbols reachable from the target, validates it and solves
    /// for all constants.
    pub fn new(spec: CombinatorialSpec) -> Result<Self, Error> {
        let spec = spec.restricted_to_reachable();
        let report = validate_spec(&spec);
        if !report.is_ok() {
            return Err(Error::InvalidSpec(report.to_string()));
        }
        let catalog = compute_catalog(&spec)?;
        let crit = solve_characteristic(&spec, DEFAULT_TOL)?;
        let consts = derived_constants(&spec, &crit, &catalog)?;
        Ok(Analysis { spec, catalog, crit, consts })
    }

    pub fn spec(&self) -> &CombinatorialSpec {
        &self.spec
    }

    pub fn catalog(&self) -> &SubtreeCatalog {
        &self.catalog
    }

    pub fn critical(&self) -> &CriticalData {
        &self.crit
    }

    pub fn constants(&self) -> &DerivedConstants {
        &self.consts
    }

    /// Nominal tilt `ε / √(n - v0)`.
    pub fn nominal_xi(&self, n: u64) -> f64 {
        self.consts.eps / libm::sqrt((n - self.consts.v0 as u64) as f64)
    }

    /// The balanced mixture for size `n` at the nominal tilt, or `SizeTooSmall`.
    pub fn make_mixture(&self, n: u64) -> Result<MixtureMeasure, Error> {
        let v0 = self.consts.v0 as u64;
        if n <= v0 {
            return Err(Error::SizeTooSmall { n: n as usize, n_min: v0 as usize + 1 });
        }
        let xi = self.nominal_xi(n);
        match MixtureMeasure::new(&self.spec, &self.crit, &self.catalog, xi) {
            Err(Error::OutsideSubcriticalBall { .. }) => {
                let ok = MixtureMeasure::adaptive(&self.spec, &self.crit, &self.catalog, xi)?.xi;
                let n_min = if ok > 0.0 {
                    let r = self.consts.eps / ok;
                    v0 + libm::ceil(r * r) as u64
                } else {
                    u64::MAX
                };
                Err(Error::SizeTooSmall { n: n as usize, n_min: n_min as usize })
            }
            other => other,
        }
    }

    /// A sampler for size `n` with the tuned tilt.
    pub fn sampler(&self, n: u64) -> Result<BridgeSampler<'_>, Error> {
        self.sampler_with(n, Tilt::Tuned)
    }

    /// A sampler for size `n`. The tilt is halved until admissible, down to the critical
    /// measure; the acceptance plan is built for the tilt actually used.
    pub fn sampler_with(&self, n: u64, tilt: Tilt) -> Result<BridgeSampler<'_>, Error> {
        let v0 = self.consts.v0 as u64;
        if n < v0 {
            return Err(Error::EmptySizeClass { n: n as usize });
        }
        let inner = if n == v0 {
            None
        } else {
            Some(match tilt {
                Tilt::Nominal => self.plan_at(n, self.consts.eps)?,
                Tilt::Fixed(eps) => self.plan_at(n, eps)?,
                Tilt::Tuned => self.tuned_plan(n)?,
            })
        };
        Ok(BridgeSampler { analysis: self, n, inner, budget: RESTART_BUDGET, node_cap: NODE_CAP })
    }

    fn plan_at(&self, n: u64, eps: f64) -> Result<(MixtureMeasure, AcceptancePlan), Error> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidTilt { eps });
        }
        let xi = eps / libm::sqrt((n - self.consts.v0 as u64) as f64);
        let mix = MixtureMeasure::adaptive(&self.spec, &self.crit, &self.catalog, xi)?;
        let plan = build_acceptance_plan(&self.consts, &mix, n)?;
        Ok((mix, plan))
    }

    /// Maximises `K_n` over `ε ∈ [ε_nom / 16, ε_nom]`: a log grid, then golden section.
    fn tuned_plan(&self, n: u64) -> Result<(MixtureMeasure, AcceptancePlan), Error> {
        let top = self.consts.eps;
        let mut best = self.plan_at(n, top)?;
        let mut best_j = 0;
        for j in 1..=TUNE_GRID {
            let cand = self.plan_at(n, top * libm::exp2(-(j as f64) / 2.0))?;
            if cand.1.log_kn > best.1.log_kn {
                best = cand;
                best_j = j;
            }
        }
        let ln_top = libm::log(top);
        let step = core::f64::consts::LN_2 / 2.0;
        let mut lo = ln_top - step * (best_j + 1).min(TUNE_GRID) as f64;
        let mut hi = ln_top - step * best_j.saturating_sub(1) as f64;
        let g = 0.5 * (libm::sqrt(5.0) - 1.0);
        for _ in 0..TUNE_GOLDEN {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            let pa = self.plan_at(n, libm::exp(a))?;
            let pb = self.plan_at(n, libm::exp(b))?;
            if pa.1.log_kn >= pb.1.log_kn {
                hi = b;
                if pa.1.log_kn > best.1.log_kn {
                    best = pa;
                }
            } else {
                lo = a;
                if pb.1.log_kn > best.1.log_kn {
                    best = pb;
                }
            }
        }
        Ok(best)
    }

    /// Like [`Analysis::sampler`] but fails with `SizeTooSmall` instead of reducing the tilt.
    pub fn sampler_strict(&self, n: u64) -> Result<BridgeSampler<'_>, Error> {
        let v0 = self.consts.v0 as u64;
        if n < v0 {
            return Err(Error::EmptySizeClass { n: n as usize });
        }
        if n == v0 {
            return self.sampler(n);
        }
        let mix = self.make_mixture(n)?;
        let plan = build_acceptance_plan(&self.consts, &mix, n)?;
        Ok(BridgeSampler { analysis: self, n, inner: Some((mix, plan)), budget: RESTART_BUDGET, node_cap: NODE_CAP })
    }
}

/// How the tilt `ε` of the mixture is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tilt {
    /// `ε = √(3 A≠ / v̄)`.
    Nominal,
    /// `ε` maximising the certified constant `K_n`, searched below the `Nominal` value.
    Tuned,
    Fixed(f64),
}

/// Exact sampler for one size.
#[derive(Clone, Debug)]
pub struct BridgeSampler<'a> {
    analysis: &'a Analysis,
    n: u64,
    inner: Option<(MixtureMeasure, AcceptancePlan)>,
    budget: u64,
    node_cap: usize,
}

enum Decision {
    Accept,
    Reject,
}

impl<'a> BridgeSampler<'a> {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn analysis(&self) -> &'a Analysis {
        self.analysis
    }

    pub fn mixture(&self) -> Option<&MixtureMeasure> {
        self.inner.as_ref().map(|x| &x.0)
    }

    pub fn plan(&self) -> Option<&AcceptancePlan> {
        self.inner.as_ref().map(|x| &x.1)
    }

    pub fn with_restart_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_node_cap(mut self, cap: usize) -> Self {
        self.node_cap = cap;
        self
    }

    pub fn sample_bridge(&self, bits: &mut BitSource) -> Result<SubtreeList, Error> {
        self.sample_bridge_with_stats(bits, &mut RunStats::default())
    }

    pub fn sample_tree(&self, bits: &mut BitSource) -> Result<ColoredTree, Error> {
        self.sample_tree_with_stats(bits, &mut RunStats::default())
    }

    pub fn sample_tree_with_stats(&self, bits: &mut BitSource, stats: &mut RunStats) -> Result<ColoredTree, Error> {
        let bridge = self.sample_bridge_with_stats(bits, stats)?;
        assemble_tree(&rotate_to_excursion(&bridge)?)
    }

    pub fn sample_structure(&self, mode: Mode, bits: &mut BitSource) -> Result<Structure, Error> {
        match mode {
            Mode::Bridge => self.sample_bridge(bits).map(Structure::Bridge),
            Mode::Excursion => self.sample_tree(bits).map(Structure::Excursion),
        }
    }

    /// A shuffled list of subtrees forming a bridge from `(0, 0)` to `(n, -1)`.
    pub fn sample_bridge_with_stats(&self, bits: &mut BitSource, stats: &mut RunStats) -> Result<SubtreeList, Error> {
        let spec = &self.analysis.spec;
        let catalog = &self.analysis.catalog;
        let Some((mix, plan)) = &self.inner else {
            stats.attempts += 1;
            stats.reached += 1;
            stats.accepted += 1;
            stats.r_sum += 1.0;
            let mut out = SubtreeList::new();
            out.push(catalog.sample_mu0(bits).as_ref());
            return Ok(out);
        };
        let mut walk = WalkGeometry::new(self.n, catalog.v0);
        let mut first = SubtreeList::with_capacity(self.n as usize, 4 * self.n as usize);
        let mut stack = Vec::new();
        let mut us: Vec<i64> = Vec::with_capacity(self.n as usize);
        for _ in 0..self.budget {
            stats.attempts += 1;
            walk.reset();
            first.clear();
            us.clear();
            let mut s = 0.0;
            while !walk.in_final_region() {
                let (v, l) = mix.sample_into(spec, &mut first, &mut stack, bits, self.node_cap)?;
                let u = walk.step(v, l);
                us.push(u);
                s += ln_cosh(plan.xi * u as f64);
            }
            stats.subtrees += us.len() as u64;
            if !walk.on_landing_diagonal() {
                continue;
            }
            stats.reached += 1;
            let k = us.len() as u64;
            let m = (walk.j + 1) as u64;
            let (log_r, err) = plan.log_acceptance(k, m, s);
            stats.r_sum += libm::exp(log_r).min(1.0);
            match decide(plan, log_r, err, &us, m, bits, stats)? {
                Decision::Reject => continue,
                Decision::Accept => {}
            }
            stats.accepted += 1;
            return Ok(self.complete(&first, m, bits));
        }
        Err(Error::RestartBudgetExceeded { budget: self.budget })
    }

    /// Appends `m` base subtrees and interleaves the two blocks uniformly.
    fn complete(&self, first: &SubtreeList, m: u64, bits: &mut BitSource) -> SubtreeList {
        let catalog = &self.analysis.catalog;
        let k = first.len();
        let word = bbhl_shuffle(k, m as usize, bits);
        let mut out = SubtreeList::with_capacity(k + m as usize, first.total_slots() + m as usize);
        let mut next = 0;
        for b in word {
            if b {
                out.push(first.get(next));
                next += 1;
            } else {
                out.push(catalog.sample_mu0(bits).as_ref());
            }
        }
        out
    }
}

/// Accepts with probability `exp(log_r)`, escalating to high precision when the
/// double-precision interval does not settle the comparison.
fn decide(
    plan: &AcceptancePlan,
    log_r: f64,
    err: f64,
    us: &[i64],
    m: u64,
    bits: &mut BitSource,
    stats: &mut RunStats,
) -> Result<Decision, Error> {
    let mut hp_value: Option<(Hp, Float)> = None;
    let hp_eval = |stats: &mut RunStats| -> (Hp, Float) {
        stats.escalations += 1;
        let mut counts = BTreeMap::new();
        for &u in us {
            *counts.entry(u).or_insert(0u64) += 1;
        }
        let mut hp = Hp::new(HP_BITS);
        let v = plan.log_acceptance_hp(&mut hp, &counts, m);
        (hp, v)
    };
    if log_r - err > 0.0 {
        let (hp, v) = hp_eval(stats);
        let exact = to_f64(&v);
        if exact > 1e-60 {
            BREACHES.fetch_add(1, Ordering::Relaxed);
            return Err(Error::InvariantBreach { log_r, err });
        }
        hp_value = Some((hp, v));
    }
    let mut u = bits.lazy_uniform();
    u.extend(bits, 53);
    if hp_value.is_none() {
        let (lo, hi) = u.bounds_f64();
        let r_lo = libm::exp(log_r - err) * (1.0 - 8.0 * EPS);
        let r_hi = libm::exp(log_r + err) * (1.0 + 8.0 * EPS);
        if hi <= r_lo {
            return Ok(Decision::Accept);
        }
        if lo >= r_hi {
            return Ok(Decision::Reject);
        }
        hp_value = Some(hp_eval(stats));
    }
    let (mut hp, v) = hp_value.unwrap();
    let r = hp.exp(&v);
    let slack = libm::ldexp(1.0, -(HP_BITS as i32) + 24);
    let r_lo = hp.mul(&r, &hp.f(1.0 - slack));
    let r_hi = hp.mul(&r, &hp.f(1.0 + slack));
    Ok(compare_lazy(&mut hp, &mut u, &r_lo, &r_hi, bits))
}

fn compare_lazy(hp: &mut Hp, u: &mut LazyUniform, r_lo: &Float, r_hi: &Float, bits: &mut BitSource) -> Decision {
    loop {
        let scale = hp.f(libm::ldexp(1.0, -(u.j as i32)));
        let x = hp.biguint(&u.x);
        let lo = hp.mul(&x, &scale);
        let hi = hp.mul(&hp.biguint(&(&u.x + BigUint::from(1u32))), &scale);
        if hi.cmp(r_lo).unwrap_or(1) <= 0 {
            return Decision::Accept;
        }
        if lo.cmp(r_hi).unwrap_or(-1) >= 0 {
            return Decision::Reject;
        }
        if u.j as usize + 32 > HP_BITS - 32 {
            // The variate agrees with r_n to working precision.
            return if lo.cmp(r_lo).unwrap_or(1) < 0 { Decision::Accept } else { Decision::Reject };
        }
        u.extend(bits, 32);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn mstar_values() {
        assert_eq!(solve_mstar(1, 0.5, 1e-14), 0.0);
        assert!(solve_mstar(50, 1e-30, 1e-14) < 1e-3);
        let m = solve_mstar(100, 0.5, 1e-14);
        assert!((m - 99.0).abs() <= 1.0, "{m}");
        let h: f64 = (1..100).map(|i| 1.0 / (m + i as f64)).sum::<f64>() + libm::log(0.5);
        assert!(h.abs() < 1e-12);
        let m = solve_mstar(1_000_000, 0.5, 1e-14);
        assert!((m / 1e6 - 1.0).abs() < 1e-3);
        let mut prev = 0.0;
        for k in 1..200 {
            let m = solve_mstar(k, 0.3, 1e-14);
            assert!(m >= prev);
            prev = m;
        }
    }

    #[test]
    fn direct_sum_and_digamma_agree() {
        let (a, da) = psi_diff(32, 7.25);
        let (b, db) = (digamma(39.25) - digamma(8.25), trigamma(39.25) - trigamma(8.25));
        assert!((a - b).abs() < 1e-13 && (da - db).abs() < 1e-13);
    }

    #[test]
    fn walk_geometry() {
        let mut w = WalkGeometry::new(10, 2);
        assert_eq!(w.step(0, 3), 4);
        assert!(!w.in_final_region());
        assert_eq!(w.step(4, 0), 2);
        assert_eq!((w.i, w.j, w.u_total), (4, 1, 6));
        w.step(2, 1);
        assert!(w.on_landing_diagonal());
    }

    #[test]
    fn binary_plan() {
        let a = Analysis::new(models::binary_trees()).unwrap();
        let s = a.sampler_with(1000, Tilt::Nominal).unwrap();
        let p = s.plan().unwrap();
        assert_eq!(p.peaks, 1);
        assert!(p.log_kn >= p.log_kn_uniform);
        let ratio = libm::exp(p.log_kn_uniform + p.log_c) / libm::pow(999.0, 1.5);
        let lead = libm::sqrt(4.0 * core::f64::consts::PI * libm::exp(3.0));
        assert!((ratio - lead).abs() < 0.2 * lead, "{ratio}");
        let k1 = p.log_acceptance(1, 0, ln_cosh(p.xi * 999.0));
        assert!(k1.0 < -20.0);
    }

    #[test]
    fn tuned_tilt_dominates_nominal() {
        let a = Analysis::new(models::rhv()).unwrap();
        for n in [50u64, 400] {
            let tuned = a.sampler(n).unwrap();
            let nominal = a.sampler_with(n, Tilt::Nominal).unwrap();
            assert!(tuned.plan().unwrap().log_kn >= nominal.plan().unwrap().log_kn);
            assert!(tuned.mixture().unwrap().xi <= nominal.mixture().unwrap().xi * (1.0 + 1e-12));
        }
        assert_eq!(a.sampler_with(50, Tilt::Fixed(-1.0)).err(), Some(Error::InvalidTilt { eps: -1.0 }));
        let crit = a.sampler_with(50, Tilt::Fixed(0.0)).unwrap();
        assert!(crit.mixture().unwrap().is_critical());
    }

    #[test]
    fn certification_at_argmax() {
        let a = Analysis::new(models::rhv()).unwrap();
        let s = a.sampler(500).unwrap();
        let p = s.plan().unwrap();
        let k = p.k_star;
        let u = p.n_prime as f64 / k as f64;
        let m = libm::floor(p.m_star) as u64;
        let (lr, err) = p.log_acceptance(k, m, k as f64 * ln_cosh(p.xi * u));
        assert!(lr + err <= 0.0);
        assert!(lr > -1.0);
    }

    #[test]
    fn binary_small_sizes() {
        let a = Analysis::new(models::binary_trees()).unwrap();
        let mut bits = BitSource::new(17);
        for n in 1..12u64 {
            let s = a.sampler(n).unwrap();
            for _ in 0..20 {
                let t = s.sample_tree(&mut bits).unwrap();
                assert_eq!(t.size(a.spec()), n as usize);
                assert!(t.is_valid(a.spec()));
            }
        }
        assert_eq!(invariant_breaches(), 0);
    }

    #[test]
    fn rhv_bridge_conditions() {
        let a = Analysis::new(models::rhv()).unwrap();
        let s = a.sampler(100).unwrap();
        let mut bits = BitSource::new(5);
        for _ in 0..20 {
            let b = s.sample_bridge(&mut bits).unwrap();
            let steps = b.steps();
            assert_eq!(steps.iter().map(|s| s.0 as u64).sum::<u64>(), 100);
            assert_eq!(steps.iter().map(|s| s.1).sum::<i64>(), -1);
            let t = assemble_tree(&rotate_to_excursion(&b).unwrap()).unwrap();
            assert!(t.is_valid(a.spec()));
            assert_eq!(t.size(a.spec()), 100);
        }
    }

    #[test]
    fn hp_agrees_with_double() {
        let a = Analysis::new(models::rhv()).unwrap();
        let s = a.sampler(300).unwrap();
        let p = s.plan().unwrap();
        let us = [3i64, 1, 1, 7, 2, 1, 40, 5];
        let (lr, err) = p.log_acceptance_steps(&us, 4);
        let mut counts = BTreeMap::new();
        for u in us {
            *counts.entry(u).or_insert(0u64) += 1;
        }
        let mut hp = Hp::new(HP_BITS);
        let v = to_f64(&p.log_acceptance_hp(&mut hp, &counts, 4));
        assert!((v - lr).abs() <= err, "{v} {lr} {err}");
        assert!(err < 1e-10);
    }

    #[test]
    fn n_equal_v0_and_below() {
        let a = Analysis::new(models::binary_trees()).unwrap();
        let mut bits = BitSource::new(1);
        let t = a.sampler(1).unwrap().sample_tree(&mut bits).unwrap();
        assert_eq!(t.size(a.spec()), 1);
        assert_eq!(a.sampler(0).unwrap_err(), Error::EmptySizeClass { n: 0 });
    }
}
