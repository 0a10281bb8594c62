//! Sampler selection shared by the `sample`, `verify` and `bench` commands.

use cfboltz_core::oracle::{count_coefficients, oracle_sample, CountTables};
use cfboltz_core::toy::{toy_accelerated_with_stats, toy_exact_sample, toy_naive_with_stats, ToyBridge};
use cfboltz_core::{Analysis, BitSource, BridgeSampler, CombinatorialSpec, Error, Mode, RunStats, Structure, Tilt};
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Accelerated,
    Oracle,
    NaiveToy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Bridge,
    Excursion,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Bridge => Mode::Bridge,
            ModeArg::Excursion => Mode::Excursion,
        }
    }
}

/// `tuned`, `nominal` or a nonnegative number.
pub fn parse_tilt(s: &str) -> Result<Tilt, String> {
    match s {
        "tuned" => Ok(Tilt::Tuned),
        "nominal" => Ok(Tilt::Nominal),
        _ => match s.parse::<f64>() {
            Ok(x) if x >= 0.0 && x.is_finite() => Ok(Tilt::Fixed(x)),
            _ => Err(format!("expected `tuned`, `nominal` or a nonnegative number, got `{s}`")),
        },
    }
}

/// Sizes up to this bound are checked against exact counts before sampling; larger sizes
/// against the period of the sizes seen up to it.
const EMPTY_CHECK_MAX: u64 = 256;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Whether no structure of size `n` exists.
pub fn size_class_empty(spec: &CombinatorialSpec, n: u64) -> bool {
    if n == 0 {
        return true;
    }
    let m = n.min(EMPTY_CHECK_MAX);
    let t = count_coefficients(spec, m as usize);
    if n <= EMPTY_CHECK_MAX {
        return t.a(n as usize).is_zero();
    }
    let sizes: Vec<u64> = (1..=m).filter(|&k| !t.a(k as usize).is_zero()).collect();
    let Some(&k0) = sizes.first() else { return true };
    let d = sizes.iter().fold(0, |g, &k| gcd(g, k - k0));
    if d == 0 { n != k0 } else { (n - k0) % d != 0 }
}

enum Inner<'a> {
    Accelerated(Box<BridgeSampler<'a>>),
    Oracle(CountTables),
}

pub struct SpecGenerator<'a> {
    analysis: &'a Analysis,
    n: u64,
    inner: Inner<'a>,
}

impl<'a> SpecGenerator<'a> {
    pub fn new(analysis: &'a Analysis, n: u64, method: Method, tilt: Tilt) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::EmptySizeClass { n: 0 });
        }
        let spec = analysis.spec();
        let inner = match method {
            Method::Oracle => {
                let t = count_coefficients(spec, n as usize);
                if t.a(n as usize).is_zero() {
                    return Err(Error::EmptySizeClass { n: n as usize });
                }
                Inner::Oracle(t)
            }
            _ => {
                if size_class_empty(spec, n) {
                    return Err(Error::EmptySizeClass { n: n as usize });
                }
                match analysis.sampler_with(n, tilt) {
                    Ok(s) => Inner::Accelerated(Box::new(s)),
                    Err(Error::SizeTooSmall { .. }) => Inner::Oracle(count_coefficients(spec, n as usize)),
                    Err(e) => return Err(e),
                }
            }
        };
        Ok(SpecGenerator { analysis, n, inner })
    }

    pub fn is_oracle(&self) -> bool {
        matches!(self.inner, Inner::Oracle(_))
    }

    pub fn sampler(&self) -> Option<&BridgeSampler<'a>> {
        match &self.inner {
            Inner::Accelerated(s) => Some(s),
            Inner::Oracle(_) => None,
        }
    }

    pub fn sample(&self, mode: Mode, bits: &mut BitSource, stats: &mut RunStats) -> Result<Structure, Error> {
        let spec = self.analysis.spec();
        match &self.inner {
            Inner::Accelerated(s) => match mode {
                Mode::Bridge => s.sample_bridge_with_stats(bits, stats).map(Structure::Bridge),
                Mode::Excursion => s.sample_tree_with_stats(bits, stats).map(Structure::Excursion),
            },
            Inner::Oracle(t) => {
                stats.attempts += 1;
                stats.reached += 1;
                stats.accepted += 1;
                stats.r_sum += 1.0;
                let tree = oracle_sample(spec, t, self.n as usize, bits)?;
                Ok(match mode {
                    Mode::Excursion => Structure::Excursion(tree),
                    Mode::Bridge => {
                        // Bridges are excursions under a uniform rotation.
                        let list = tree.decompose(spec);
                        let j = bits.uniform_below(list.len() as u64) as usize;
                        Structure::Bridge(list.rotated(j))
                    }
                })
            }
        }
    }
}

pub fn sample_toy(n: usize, method: Method, bits: &mut BitSource, stats: &mut RunStats) -> ToyBridge {
    match method {
        Method::Accelerated => toy_accelerated_with_stats(n, bits, stats),
        Method::NaiveToy => toy_naive_with_stats(n, bits, stats),
        Method::Oracle => {
            stats.attempts += 1;
            stats.reached += 1;
            stats.accepted += 1;
            stats.r_sum += 1.0;
            toy_exact_sample(n, bits)
        }
    }
}

/// Bit source of stream `i` out of `streams`: the seed itself for a single stream.
pub fn stream_source(seed: u64, i: usize, streams: usize) -> BitSource {
    let base = BitSource::new(seed);
    if streams <= 1 {
        base
    } else {
        base.split(i as u64)
    }
}

/// Number of items stream `i` produces when `count` items are split over `streams`.
pub fn stream_share(count: usize, i: usize, streams: usize) -> usize {
    count / streams + usize::from(i < count % streams)
}
