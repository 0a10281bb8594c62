//! Sampler frequencies against exact probabilities.

use std::collections::HashMap;
use std::hash::Hash;

use cfboltz_core::oracle::enumerate_structures;
use cfboltz_core::toy::toy_exact;
use cfboltz_core::{Analysis, Error, Mode, RunStats, Structure, Tilt};
use num_traits::ToPrimitive;

use crate::sampling::{sample_toy, stream_source, Method, SpecGenerator};
use crate::stats::{chi_square, ChiSquare};

pub const ALPHA: f64 = 0.001;
pub const ENUMERATION_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub classes: usize,
    pub samples: usize,
    pub chi: ChiSquare,
    pub stats: RunStats,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.chi.passes(ALPHA)
    }
}

fn tally<T: Eq + Hash>(classes: &[(T, f64)], draws: impl Iterator<Item = T>) -> (Vec<u64>, u64) {
    let index: HashMap<&T, usize> = classes.iter().enumerate().map(|(i, c)| (&c.0, i)).collect();
    let mut counts = vec![0u64; classes.len()];
    let mut outside = 0;
    for d in draws {
        match index.get(&d) {
            Some(&i) => counts[i] += 1,
            None => outside += 1,
        }
    }
    (counts, outside)
}

/// Samples `samples` trees (default 1000 per class) and runs a chi-square test against
/// `W(T) / A_n`.
pub fn verify_spec(
    analysis: &Analysis,
    n: u64,
    samples: Option<usize>,
    seed: u64,
    method: Method,
    tilt: Tilt,
) -> Result<VerifyReport, Error> {
    let spec = analysis.spec();
    let classes: Vec<_> = enumerate_structures(spec, n as usize, ENUMERATION_CAP)?
        .into_iter()
        .map(|(t, w)| (t, w.to_f64().unwrap_or(f64::NAN)))
        .collect();
    if classes.is_empty() {
        return Err(Error::EmptySizeClass { n: n as usize });
    }
    let samples = samples.unwrap_or(1000 * classes.len());
    let gen = SpecGenerator::new(analysis, n, method, tilt)?;
    let mut bits = stream_source(seed, 0, 1);
    let mut stats = RunStats::default();
    let mut trees = Vec::with_capacity(samples);
    for _ in 0..samples {
        match gen.sample(Mode::Excursion, &mut bits, &mut stats)? {
            Structure::Excursion(t) => trees.push(t),
            Structure::Bridge(_) => unreachable!("excursion mode"),
        }
    }
    let (counts, outside) = tally(&classes, trees.into_iter());
    let probs: Vec<f64> = classes.iter().map(|c| c.1).collect();
    Ok(VerifyReport { classes: classes.len(), samples, chi: chi_square(&counts, &probs, outside), stats })
}

pub fn verify_toy(n: usize, samples: Option<usize>, seed: u64, method: Method) -> VerifyReport {
    let classes: Vec<_> = toy_exact(n).into_iter().map(|(b, p)| (b, p.to_f64().unwrap_or(f64::NAN))).collect();
    let samples = samples.unwrap_or(1000 * classes.len());
    let mut bits = stream_source(seed, 0, 1);
    let mut stats = RunStats::default();
    let draws: Vec<_> = (0..samples).map(|_| sample_toy(n, method, &mut bits, &mut stats)).collect();
    let (counts, outside) = tally(&classes, draws.into_iter());
    let probs: Vec<f64> = classes.iter().map(|c| c.1).collect();
    VerifyReport { classes: classes.len(), samples, chi: chi_square(&counts, &probs, outside), stats }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cfboltz_core::models;

    #[test]
    fn binary_small() {
        let a = Analysis::new(models::binary_trees()).unwrap();
        let r = verify_spec(&a, 2, None, 1, Method::Accelerated, Tilt::Tuned).unwrap();
        assert_eq!((r.classes, r.samples), (1, 1000));
        assert!(r.passed());
        let r = verify_spec(&a, 5, None, 1, Method::Oracle, Tilt::Tuned).unwrap();
        assert_eq!(r.classes, 14);
        assert!(r.passed());
    }

    #[test]
    fn toy_small() {
        for m in [Method::Accelerated, Method::NaiveToy, Method::Oracle] {
            let r = verify_toy(4, None, 2, m);
            assert_eq!(r.classes, 19);
            assert!(r.passed(), "{m:?}: {:?}", r.chi);
        }
    }
}
