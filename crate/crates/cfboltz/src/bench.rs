//! Scaling and entropy measurements.

use std::time::Instant;

use cfboltz_core::{Analysis, BitSource, Error, Mode, RunStats, Tilt};

use crate::sampling::{sample_toy, stream_share, stream_source, Method, SpecGenerator};

pub const CSV_HEADER: &str = "size,time_ns,restarts,bits,reach,racc";

/// Untimed samples drawn from a separate stream before measuring.
const WARMUP: usize = 5;

/// Per-size means with standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub size: u64,
    pub samples: usize,
    /// Mean wall time per accepted sample.
    pub time_ns: f64,
    pub time_se: f64,
    /// Mean rejected walks per accepted sample.
    pub restarts: f64,
    pub restarts_se: f64,
    /// Mean random bits per accepted sample.
    pub bits: f64,
    pub bits_se: f64,
    /// Fraction of walks landing on the diagonal.
    pub reach: f64,
    pub reach_se: f64,
    /// Mean acceptance rate over landed walks.
    pub racc: f64,
    /// `bits / (n log2(1/ρ))`.
    pub shannon_ratio: f64,
    pub setup_ns: f64,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        format!("{},{:.0},{:.4},{:.1},{:.4},{:.4}", self.size, self.time_ns, self.restarts, self.bits, self.reach, self.racc)
    }
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

struct Tally {
    times: Vec<f64>,
    restarts: Vec<f64>,
    bits: Vec<f64>,
    stats: RunStats,
}

impl Tally {
    fn new(reps: usize) -> Self {
        Tally { times: Vec::with_capacity(reps), restarts: Vec::with_capacity(reps), bits: Vec::with_capacity(reps), stats: RunStats::default() }
    }

    fn row(self, size: u64, bits_per_size: f64, setup_ns: f64) -> BenchRow {
        let (time_ns, time_se) = mean_se(&self.times);
        let (restarts, restarts_se) = mean_se(&self.restarts);
        let (bits, bits_se) = mean_se(&self.bits);
        let s = &self.stats;
        let reach = s.reached as f64 / s.attempts as f64;
        BenchRow {
            size,
            samples: self.times.len(),
            time_ns,
            time_se,
            restarts,
            restarts_se,
            bits,
            bits_se,
            reach,
            reach_se: (reach * (1.0 - reach) / s.attempts as f64).sqrt(),
            racc: s.r_sum / s.reached as f64,
            shannon_ratio: bits / (size as f64 * bits_per_size),
            setup_ns,
        }
    }
}

/// Rounds over which the sizes of [`bench_spec_many`] are interleaved.
const ROUNDS: usize = 10;

struct SizeRun<'a> {
    gen: SpecGenerator<'a>,
    bits: BitSource,
    tally: Tally,
    setup_ns: f64,
}

impl SizeRun<'_> {
    fn draw(&mut self) -> Result<(), Error> {
        let before = self.tally.stats.attempts;
        let b0 = self.bits.bits_consumed();
        let t = Instant::now();
        let s = self.gen.sample(Mode::Excursion, &mut self.bits, &mut self.tally.stats)?;
        self.tally.times.push(t.elapsed().as_nanos() as f64);
        drop(s);
        self.tally.restarts.push((self.tally.stats.attempts - before - 1) as f64);
        self.tally.bits.push((self.bits.bits_consumed() - b0) as f64);
        Ok(())
    }
}

/// Measures `reps[i]` samples at `sizes[i]`. Sizes are interleaved in rounds so that
/// drifting machine load affects all of them alike. Each size uses its own stream of
/// `seed`, so results do not depend on the other sizes.
pub fn bench_spec_many(
    analysis: &Analysis,
    sizes: &[u64],
    reps: &[usize],
    seed: u64,
    method: Method,
    tilt: Tilt,
) -> Result<Vec<BenchRow>, Error> {
    assert_eq!(sizes.len(), reps.len());
    let mut runs = Vec::with_capacity(sizes.len());
    for (&size, &r) in sizes.iter().zip(reps) {
        let t0 = Instant::now();
        let gen = SpecGenerator::new(analysis, size, method, tilt)?;
        let setup_ns = t0.elapsed().as_nanos() as f64;
        let mut warm = stream_source(seed, 1, 2);
        for _ in 0..WARMUP.min(r) {
            gen.sample(Mode::Excursion, &mut warm, &mut RunStats::default())?;
        }
        runs.push(SizeRun { gen, bits: stream_source(seed, 0, 1), tally: Tally::new(r), setup_ns });
    }
    for round in 0..ROUNDS {
        for (run, &r) in runs.iter_mut().zip(reps) {
            for _ in 0..stream_share(r, round, ROUNDS) {
                run.draw()?;
            }
        }
    }
    let per_size = (1.0 / analysis.critical().zeta).log2();
    Ok(runs.into_iter().zip(sizes).map(|(run, &size)| run.tally.row(size, per_size, run.setup_ns)).collect())
}

pub fn bench_spec(analysis: &Analysis, size: u64, reps: usize, seed: u64, method: Method, tilt: Tilt) -> Result<BenchRow, Error> {
    Ok(bench_spec_many(analysis, &[size], &[reps], seed, method, tilt)?.remove(0))
}

/// The toy model's Shannon bound is `log2 C(2n, n) ≈ 2n` bits.
pub fn bench_toy(size: u64, reps: usize, seed: u64, method: Method) -> BenchRow {
    let mut bits = stream_source(seed, 0, 1);
    let mut tally = Tally::new(reps);
    for _ in 0..reps {
        let before = tally.stats.attempts;
        let b0 = bits.bits_consumed();
        let t = Instant::now();
        let b = sample_toy(size as usize, method, &mut bits, &mut tally.stats);
        tally.times.push(t.elapsed().as_nanos() as f64);
        drop(b);
        tally.restarts.push((tally.stats.attempts - before - 1) as f64);
        tally.bits.push((bits.bits_consumed() - b0) as f64);
    }
    tally.row(size, 2.0, 0.0)
}

/// Growth of `value` per factor 10 in size between consecutive rows.
pub fn per_decade(rows: &[BenchRow], value: impl Fn(&BenchRow) -> f64) -> Vec<(u64, u64, f64)> {
    rows.windows(2)
        .map(|w| {
            let decades = (w[1].size as f64 / w[0].size as f64).log10();
            (w[0].size, w[1].size, (value(&w[1]) / value(&w[0])).powf(1.0 / decades))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use cfboltz_core::models;

    #[test]
    fn stats_helpers() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let row = |size, t| BenchRow { size, time_ns: t, ..bench_toy(4, 1, 0, Method::Accelerated) };
        let r = per_decade(&[row(10, 1.0), row(1000, 100.0)], |r| r.time_ns);
        assert!((r[0].2 - 10.0).abs() < 1e-9);
    }

    #[test]
    fn rows_are_sane() {
        let a = Analysis::new(models::binary_trees()).unwrap();
        let r = bench_spec(&a, 200, 20, 3, Method::Accelerated, Tilt::Tuned).unwrap();
        assert_eq!(r.samples, 20);
        assert!(r.reach > 0.0 && r.reach <= 1.0);
        assert!(r.racc > 0.0 && r.racc <= 1.0);
        assert!(r.bits > 200.0);
        assert!(r.csv().starts_with("200,"));
        let many = bench_spec_many(&a, &[100, 200], &[7, 20], 3, Method::Accelerated, Tilt::Tuned).unwrap();
        assert_eq!(many[1], BenchRow { time_ns: many[1].time_ns, time_se: many[1].time_se, setup_ns: many[1].setup_ns, ..r.clone() });
        assert_eq!(many[0].samples, 7);
        let t = bench_toy(100, 50, 3, Method::Accelerated);
        assert!(t.reach > 0.5 && t.reach < 1.0);
    }
}
