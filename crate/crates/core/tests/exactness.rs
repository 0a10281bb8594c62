use std::collections::HashMap;

use cfboltz_core::oracle::enumerate_structures;
use cfboltz_core::{invariant_breaches, models, Analysis, BitSource, ColoredTree, CombinatorialSpec, Monomial, Tilt};
use num_traits::ToPrimitive;

/// 0.999 quantile of chi-square with `k` degrees of freedom (Wilson–Hilferty).
fn chi2_999(k: f64) -> f64 {
    let z = 3.090_232;
    let a = 2.0 / (9.0 * k);
    k * (1.0 - a + z * a.sqrt()).powi(3)
}

fn check(spec: CombinatorialSpec, n: u64, per_class: usize, tilt: Tilt, seed: u64) {
    let analysis = Analysis::new(spec).unwrap();
    let exact = enumerate_structures(analysis.spec(), n as usize, 1_000_000).unwrap();
    let total: f64 = exact.iter().map(|(_, w)| w.to_f64().unwrap()).sum();
    let reps = per_class * exact.len();
    let sampler = analysis.sampler_with(n, tilt).unwrap();
    let mut bits = BitSource::new(seed);
    let mut counts: HashMap<ColoredTree, u64> = HashMap::new();
    for _ in 0..reps {
        let t = sampler.sample_tree(&mut bits).unwrap();
        assert!(t.is_valid(analysis.spec()));
        assert_eq!(t.size(analysis.spec()), n as usize);
        *counts.entry(t).or_default() += 1;
    }
    let mut chi = 0.0;
    for (t, w) in &exact {
        let e = w.to_f64().unwrap() / total * reps as f64;
        let o = counts.remove(t).unwrap_or(0) as f64;
        chi += (o - e) * (o - e) / e;
    }
    assert!(counts.is_empty(), "sampled a tree outside the class");
    if exact.len() > 1 {
        let q = chi2_999((exact.len() - 1) as f64);
        assert!(chi < q, "n = {n}, {tilt:?}: chi-square {chi} >= {q}");
    }
}

fn unary_binary_ternary() -> CombinatorialSpec {
    CombinatorialSpec::new(
        vec!["A".into()],
        vec![vec![Monomial::unit(1, vec![0]), Monomial::unit(0, vec![2]), Monomial::unit(0, vec![3])]],
    )
    .unwrap()
}

#[test]
fn binary_trees_match_oracle() {
    for n in [1, 2, 3, 4, 6] {
        check(models::binary_trees(), n, 400, Tilt::Tuned, n);
    }
    check(models::binary_trees(), 6, 400, Tilt::Nominal, 99);
}

#[test]
fn rhv_matches_oracle() {
    for n in [1, 2, 3, 4] {
        check(models::rhv(), n, 400, Tilt::Tuned, 10 + n);
    }
    check(models::rhv(), 4, 300, Tilt::Nominal, 5);
}

#[test]
fn mixed_arity_matches_oracle() {
    for n in [3, 5, 6] {
        check(unary_binary_ternary(), n, 200, Tilt::Tuned, 20 + n);
        check(unary_binary_ternary(), n, 200, Tilt::Fixed(0.0), 30 + n);
        check(unary_binary_ternary(), n, 200, Tilt::Fixed(2.0), 40 + n);
    }
    assert_eq!(invariant_breaches(), 0);
}

#[test]
fn large_sizes_are_valid() {
    let analysis = Analysis::new(models::rhv()).unwrap();
    let mut bits = BitSource::new(3);
    for n in [100u64, 1000] {
        let s = analysis.sampler(n).unwrap();
        for _ in 0..5 {
            let t = s.sample_tree(&mut bits).unwrap();
            assert!(t.is_valid(analysis.spec()));
            assert_eq!(t.size(analysis.spec()), n as usize);
        }
    }
}
