//! The `cfboltz` command line.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use cfboltz_core::critical::condition_residuals;
use cfboltz_core::oracle::count_coefficients;
use cfboltz_core::{validate_spec, Analysis, CombinatorialSpec, Error, Mode, RunStats, Structure, Tilt};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use crate::bench::{bench_spec_many, bench_toy, per_decade, BenchRow, CSV_HEADER};
use crate::format::{structure_line, toy_line, Format};
use crate::models::{builtin, load_spec_file, LoadError, Model, BUILTIN_NAMES};
use crate::parser::ParseError;
use crate::render::render_spec;
use crate::sampling::{parse_tilt, sample_toy, stream_share, stream_source, Method, ModeArg, SpecGenerator};
use crate::svg::{render_rhv, SvgError};
use crate::verify::{verify_spec, verify_toy, VerifyReport, ALPHA};

#[derive(Parser, Debug)]
#[command(name = "cfboltz", version, about = "Exact linear-time sampling from context-free specifications")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct Target {
    /// Specification file.
    #[arg(long, global = false)]
    pub spec: Option<PathBuf>,
    /// Built-in model: binary, rhv or toy.
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SamplerArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Method::Accelerated)]
    pub method: Method,
    /// `tuned`, `nominal` or a fixed nonnegative tilt.
    #[arg(long, value_parser = parse_tilt, default_value = "tuned")]
    pub tilt: Tilt,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse, validate and print the specification in canonical form.
    Parse {
        #[command(flatten)]
        target: Target,
    },
    /// Critical point, eigenvalue, residuals and derived constants.
    Critical {
        #[command(flatten)]
        target: Target,
    },
    /// Exact counts `A_k` for `k = 1..n`.
    Count {
        #[command(flatten)]
        target: Target,
        #[arg(short = 'n')]
        n: u64,
    },
    /// Draw structures of size `n`.
    Sample {
        #[command(flatten)]
        target: Target,
        #[arg(short = 'n')]
        n: u64,
        #[arg(short = 'c', default_value_t = 1)]
        count: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Excursion)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = Format::TreeParen)]
        format: Format,
        /// Independent streams with split seeds.
        #[arg(short = 'j', default_value_t = 1)]
        jobs: usize,
        /// Also draw the first sample as an SVG (rhv only).
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
    /// Chi-square test of sampled frequencies against exact probabilities.
    Verify {
        #[command(flatten)]
        target: Target,
        #[arg(short = 'n')]
        n: u64,
        /// Number of samples; 1000 per class by default.
        #[arg(short = 'c')]
        count: Option<usize>,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
    /// CSV of per-size time, restarts, bits, reach and acceptance rates.
    Bench {
        #[command(flatten)]
        target: Target,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<u64>,
        /// Samples per size.
        #[arg(short = 'c', default_value_t = 100)]
        count: usize,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Svg(#[from] SvgError),
    #[error("unknown model `{0}` (expected one of {names})", names = BUILTIN_NAMES.join(", "))]
    UnknownModel(String),
    #[error("{0}")]
    Usage(String),
    #[error("invalid specification:\n{0}")]
    Validation(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn core_code(e: &Error) -> i32 {
    match e {
        Error::InvalidSpec(_) | Error::NoExcursion => 3,
        Error::EmptySizeClass { .. } | Error::SizeTooSmall { .. } => 4,
        Error::CapExceeded { .. } | Error::InvalidTilt { .. } => 1,
        _ => 5,
    }
}

impl CliError {
    /// 2 parse, 3 validation, 4 empty size class, 5 numeric failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Load(LoadError::Parse { source: ParseError::Spec(e), .. }) => core_code(e).max(3),
            CliError::Load(LoadError::Parse { .. }) => 2,
            CliError::Validation(_) => 3,
            CliError::Core(e) => core_code(e),
            _ => 1,
        }
    }
}

fn load(target: &Target) -> Result<Model, CliError> {
    match (&target.spec, &target.model) {
        (Some(p), _) => Ok(Model::Spec(load_spec_file(p)?)),
        (None, Some(name)) => builtin(name).ok_or_else(|| CliError::UnknownModel(name.clone())),
        (None, None) => Err(CliError::Usage("one of --spec or --model is required".into())),
    }
}

fn analysis(spec: CombinatorialSpec) -> Result<Analysis, CliError> {
    let report = validate_spec(&spec.restricted_to_reachable());
    if !report.is_ok() {
        return Err(CliError::Validation(report.to_string()));
    }
    Ok(Analysis::new(spec)?)
}

fn toy_unsupported(what: &str) -> CliError {
    CliError::Usage(format!("the toy model has no specification; `{what}` is not available"))
}

fn cmd_parse(model: Model, out: &mut dyn Write) -> Result<(), CliError> {
    let Model::Spec(spec) = model else { return Err(toy_unsupported("parse")) };
    let report = validate_spec(&spec.restricted_to_reachable());
    if !report.is_ok() {
        return Err(CliError::Validation(report.to_string()));
    }
    write!(out, "{}", render_spec(&spec))?;
    Ok(())
}

fn cmd_critical(model: Model, out: &mut dyn Write) -> Result<(), CliError> {
    let Model::Spec(spec) = model else {
        writeln!(out, "z* = 0.250000000000000")?;
        writeln!(out, "reach probability = 0.750000000000000")?;
        return Ok(());
    };
    let a = analysis(spec)?;
    let crit = a.critical();
    let spec = a.spec();
    writeln!(out, "z* = {:.15}", crit.zeta)?;
    for (i, t) in crit.tau.iter().enumerate() {
        writeln!(out, "{}* = {:.15}", spec.symbol_name(i), t)?;
    }
    let (r0, r1) = condition_residuals(spec, crit)?;
    writeln!(out, "frobenius eigenvalue = {:.15}", crit.frob_eigenvalue)?;
    writeln!(out, "system tolerance = {:.3e}", crit.tolerance)?;
    writeln!(out, "residual A/theta - 1 = {r0:.3e}")?;
    writeln!(out, "residual d(A/theta)/dtheta = {r1:.3e}")?;
    let c = a.constants();
    writeln!(out, "v0 = {}", c.v0)?;
    writeln!(out, "T0 = {:.15}", c.t0)?;
    writeln!(out, "A0 = {:.15}", c.a0)?;
    writeln!(out, "A_neq = {:.15}", c.aneq)?;
    writeln!(out, "vbar = {:.15}", c.vbar)?;
    writeln!(out, "eps = {:.15}", c.eps)?;
    writeln!(out, "reach probability = {:.15}", c.reach_prob)?;
    Ok(())
}

fn binomial(n: u64, k: u64) -> BigUint {
    let mut r = BigUint::from(1u32);
    for i in 0..k {
        r = r * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    r
}

fn cmd_count(model: Model, n: u64, out: &mut dyn Write) -> Result<(), CliError> {
    match model {
        Model::Toy => {
            for k in 1..=n {
                writeln!(out, "{k} {}", binomial(2 * k, k))?;
            }
        }
        Model::Spec(spec) => {
            let report = validate_spec(&spec.restricted_to_reachable());
            if !report.is_ok() {
                return Err(CliError::Validation(report.to_string()));
            }
            let t = count_coefficients(&spec, n as usize);
            for k in 1..=n as usize {
                writeln!(out, "{k} {}", t.a(k))?;
            }
        }
    }
    Ok(())
}

struct SampleCfg {
    n: u64,
    count: usize,
    mode: Mode,
    format: Format,
    jobs: usize,
    seed: u64,
}

fn run_streams<T: Send>(cfg: &SampleCfg, work: impl Fn(usize, usize) -> Result<Vec<T>, CliError> + Sync) -> Result<Vec<T>, CliError> {
    let jobs = cfg.jobs.max(1);
    if jobs == 1 {
        return work(0, cfg.count);
    }
    let results: Vec<Result<Vec<T>, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|i| {
                let work = &work;
                s.spawn(move || work(i, stream_share(cfg.count, i, jobs)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sampler thread panicked")).collect()
    });
    let mut all = Vec::with_capacity(cfg.count);
    for r in results {
        all.extend(r?);
    }
    Ok(all)
}

fn cmd_sample(model: Model, cfg: SampleCfg, sampler: &SamplerArgs, svg: Option<PathBuf>, out: &mut dyn Write) -> Result<(), CliError> {
    if cfg.n == 0 {
        return Err(CliError::Core(Error::EmptySizeClass { n: 0 }));
    }
    let jobs = cfg.jobs.max(1);
    match model {
        Model::Toy => {
            if svg.is_some() {
                return Err(SvgError::UnsupportedModel.into());
            }
            let lines = run_streams(&cfg, |i, k| {
                let mut bits = stream_source(cfg.seed, i, jobs);
                let mut stats = RunStats::default();
                Ok((0..k).map(|_| toy_line(&sample_toy(cfg.n as usize, sampler.method, &mut bits, &mut stats), cfg.format)).collect())
            })?;
            for l in lines {
                writeln!(out, "{l}")?;
            }
        }
        Model::Spec(spec) => {
            let a = analysis(spec)?;
            let gen = SpecGenerator::new(&a, cfg.n, sampler.method, sampler.tilt)?;
            let structures = run_streams(&cfg, |i, k| {
                let mut bits = stream_source(cfg.seed, i, jobs);
                let mut stats = RunStats::default();
                (0..k).map(|_| gen.sample(cfg.mode, &mut bits, &mut stats).map_err(CliError::from)).collect()
            })?;
            for s in &structures {
                writeln!(out, "{}", structure_line(a.spec(), s, cfg.format))?;
            }
            if let Some(path) = svg {
                let tree = match structures.first() {
                    Some(Structure::Excursion(t)) => t.clone(),
                    Some(Structure::Bridge(b)) => cfboltz_core::tree::assemble_tree(&cfboltz_core::cyclic::rotate_to_excursion(b)?)?,
                    None => return Ok(()),
                };
                std::fs::write(path, render_rhv(a.spec(), &tree)?)?;
            }
        }
    }
    Ok(())
}

fn report_verify(r: &VerifyReport, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "classes = {}", r.classes)?;
    writeln!(out, "samples = {}", r.samples)?;
    writeln!(out, "statistic = {:.4}", r.chi.statistic)?;
    writeln!(out, "dof = {}", r.chi.dof)?;
    writeln!(out, "p-value = {:.6}", r.chi.p_value)?;
    let verdict = if r.passed() { "pass" } else { "fail" };
    writeln!(out, "result = {verdict} (alpha = {ALPHA})")?;
    if r.passed() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(format!("p = {:.3e} < {ALPHA}", r.chi.p_value)))
    }
}

fn cmd_verify(model: Model, n: u64, count: Option<usize>, sampler: &SamplerArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let report = match model {
        Model::Toy => verify_toy(n as usize, count, sampler.seed, sampler.method),
        Model::Spec(spec) => verify_spec(&analysis(spec)?, n, count, sampler.seed, sampler.method, sampler.tilt)?,
    };
    report_verify(&report, out)
}

fn cmd_bench(model: Model, sizes: &[u64], reps: usize, sampler: &SamplerArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Usage("--sizes must be strictly ascending".into()));
    }
    if reps == 0 {
        return Err(CliError::Usage("-c must be at least 1".into()));
    }
    let an = match &model {
        Model::Spec(spec) => Some(analysis(spec.clone())?),
        Model::Toy => None,
    };
    writeln!(out, "{CSV_HEADER}")?;
    let rows: Vec<BenchRow> = match &an {
        Some(a) => bench_spec_many(a, sizes, &vec![reps; sizes.len()], sampler.seed, sampler.method, sampler.tilt)?,
        None => sizes.iter().map(|&size| bench_toy(size, reps, sampler.seed, sampler.method)).collect(),
    };
    for row in &rows {
        writeln!(out, "{}", row.csv())?;
        writeln!(
            err,
            "size {}: time {:.0} ± {:.0} ns, restarts {:.3} ± {:.3}, bits {:.1} ± {:.1}, reach {:.4} ± {:.4}, racc {:.4}, shannon ratio {:.3}, setup {:.0} ns",
            row.size, row.time_ns, row.time_se, row.restarts, row.restarts_se, row.bits, row.bits_se, row.reach, row.reach_se, row.racc, row.shannon_ratio, row.setup_ns
        )?;
    }
    for (a, b, r) in per_decade(&rows, |r| r.time_ns) {
        writeln!(err, "time ratio per decade {a} -> {b}: {r:.2}")?;
    }
    Ok(())
}

pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Parse { target } => cmd_parse(load(&target)?, out),
        Command::Critical { target } => cmd_critical(load(&target)?, out),
        Command::Count { target, n } => cmd_count(load(&target)?, n, out),
        Command::Sample { target, n, count, mode, format, jobs, svg, sampler } => {
            let cfg = SampleCfg { n, count, mode: mode.into(), format, jobs, seed: sampler.seed };
            cmd_sample(load(&target)?, cfg, &sampler, svg, out)
        }
        Command::Verify { target, n, count, sampler } => cmd_verify(load(&target)?, n, count, &sampler, out),
        Command::Bench { target, sizes, count, sampler } => cmd_bench(load(&target)?, &sizes, count, &sampler, out, err),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 1;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match execute(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
