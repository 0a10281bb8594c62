use std::collections::BTreeMap;

use cfboltz_core::cyclic::{cyc, is_excursion};
use cfboltz_core::hp::{to_f64, Hp};
use cfboltz_core::linalg::{frobenius_eigenvalue, is_irreducible, Matrix};
use cfboltz_core::oracle::enumerate_structures;
use cfboltz_core::shuffle::bbhl_shuffle;
use cfboltz_core::special::{c_bounds, c_fn, ln_factorial_interval};
use cfboltz_core::toy::{toy_m_star, toy_r_exact};
use cfboltz_core::tree::assemble_tree;
use cfboltz_core::{models, BitSource};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

fn step_list() -> impl Strategy<Value = Vec<(u32, i64)>> {
    // Up-steps are arbitrary; the list is padded with down-steps until it ends at -1.
    prop::collection::vec((0u32..4, 0i64..4), 0..30).prop_flat_map(|ups| {
        let total: i64 = ups.iter().map(|s| s.1).sum();
        let mut steps = ups.clone();
        for _ in 0..total + 1 {
            steps.push((1, -1));
        }
        Just(steps).prop_shuffle()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn exactly_one_rotation_is_an_excursion(steps in step_list()) {
        let k = steps.len();
        let good: Vec<usize> = (0..k)
            .filter(|&j| {
                let rot: Vec<_> = steps[j..].iter().chain(&steps[..j]).copied().collect();
                is_excursion(&rot)
            })
            .collect();
        prop_assert_eq!(good, vec![cyc(&steps).unwrap()]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn toy_acceptance_is_a_probability(n in 1u64..400, frac in 0.0f64..=1.0) {
        let m = ((n / 2) as f64 * frac) as u64;
        let r = toy_r_exact(n, m);
        prop_assert!(r <= BigRational::one());
        prop_assert!(r > BigRational::from_integer(0.into()));
        prop_assert_eq!(toy_r_exact(n, toy_m_star(n)), BigRational::one());
    }

    #[test]
    fn shuffle_preserves_counts(ones in 0usize..50, zeros in 0usize..50, seed in any::<u64>()) {
        let mut bits = BitSource::new(seed);
        let s = bbhl_shuffle(ones, zeros, &mut bits);
        prop_assert_eq!(s.len(), ones + zeros);
        prop_assert_eq!(s.iter().filter(|&&b| b).count(), ones);
    }
}

#[test]
fn frobenius_eigenvalue_increases_with_first_column() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(2024);
    let mut done = 0;
    while done < 50 {
        let n = rng.gen_range(3..=6);
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if rng.gen_bool(0.6) {
                    m[(i, j)] = rng.gen_range(0.01..2.0);
                }
            }
        }
        if !is_irreducible(&m) || (0..n).all(|i| m[(i, 0)] == 0.0) {
            continue;
        }
        let scaled = |x: f64| {
            let mut k = m.clone();
            for i in 0..n {
                k[(i, 0)] *= x;
            }
            frobenius_eigenvalue(&k, 1e-13).unwrap().0
        };
        let xs = [0.1, 0.5, 1.0, 1.5, 3.0];
        let ls: Vec<f64> = xs.iter().map(|&x| scaled(x)).collect();
        for w in ls.windows(2) {
            assert!(w[1] > w[0], "{ls:?}");
        }
        done += 1;
    }
}

#[test]
fn frobenius_closed_form() {
    // [[x,1],[1,1]] has λ1 = (x + 1 + √((x-1)^2 + 4)) / 2.
    let mut prev = 0.0;
    for x in [0.5, 1.0, 2.0] {
        let m = Matrix::from_rows(&[&[x, 1.0], &[1.0, 1.0]]);
        let l = frobenius_eigenvalue(&m, 1e-14).unwrap().0;
        let want = 0.5 * (x + 1.0 + ((x - 1.0) * (x - 1.0) + 4.0).sqrt());
        assert!((l - want).abs() < 1e-12);
        assert!(l > prev);
        prev = l;
    }
}

#[test]
fn assemble_inverts_decompose() {
    for (spec, max_n) in [(models::binary_trees(), 6), (models::rhv(), 4)] {
        for n in 1..=max_n {
            for (tree, _) in enumerate_structures(&spec, n, 1_000_000).unwrap() {
                let list = tree.decompose(&spec);
                assert!(is_excursion(&list.steps()));
                assert_eq!(assemble_tree(&list).unwrap(), tree);
            }
        }
    }
}

#[test]
fn bbhl_three_three_is_uniform() {
    let mut bits = BitSource::new(17);
    let reps = 200_000;
    let mut counts: BTreeMap<Vec<bool>, u64> = BTreeMap::new();
    for _ in 0..reps {
        *counts.entry(bbhl_shuffle(3, 3, &mut bits)).or_default() += 1;
    }
    assert_eq!(counts.len(), 20);
    let e = reps as f64 / 20.0;
    let chi: f64 = counts.values().map(|&o| (o as f64 - e).powi(2) / e).sum();
    // 0.999 quantile of chi-square with 19 degrees of freedom.
    assert!(chi < 43.82, "{chi}");
}

fn robbins_holds(hp: &mut Hp, n: u64, ln_fact: &astro_float::BigFloat) -> bool {
    let nf = hp.u(n);
    let half = hp.f(0.5);
    let two_pi = {
        let pi = hp.pi();
        hp.mul(&hp.f(2.0), &pi)
    };
    let ln_2pi = hp.ln(&two_pi);
    let ln_n = hp.ln(&nf);
    let base = hp.sub(&hp.add(&hp.mul(&half, &ln_2pi), &hp.mul(&hp.add(&nf, &half), &ln_n)), &nf);
    let corr = hp.sub(ln_fact, &base);
    let lo = hp.div(&hp.u(1), &hp.u(12 * n + 1));
    let hi = hp.div(&hp.u(1), &hp.u(12 * n));
    corr.cmp(&lo).unwrap() >= 0 && corr.cmp(&hi).unwrap() <= 0
}

#[test]
fn robbins_inequality() {
    let mut hp = Hp::new(256);
    let mut fact = BigUint::one();
    for n in 1..=10_000u64 {
        fact *= n;
        let ln_fact = {
            let f = hp.biguint(&fact);
            hp.ln(&f)
        };
        assert!(robbins_holds(&mut hp, n, &ln_fact), "n = {n}");
        let (lo, hi) = ln_factorial_interval(n);
        let v = to_f64(&ln_fact);
        assert!(lo <= v && v <= hi, "n = {n}");
    }
    for n in [100_000u64, 1_000_000] {
        let ln_fact = hp.ln_factorial(n);
        assert!(robbins_holds(&mut hp, n, &ln_fact), "n = {n}");
    }
}

#[test]
fn c_function_rational_bounds() {
    for j in -20..=10 {
        let x = 2f64.powi(j);
        let (lo, hi) = c_bounds(x);
        let c = c_fn(x);
        assert!(lo <= c * (1.0 + 1e-12) && c <= hi * (1.0 + 1e-12), "x = {x}: {lo} {c} {hi}");
    }
}
