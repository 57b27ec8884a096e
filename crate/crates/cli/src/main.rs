//! Command-line front end: bounds, figure data, exact finite-n moments,
//! exhaustive helper searches, verification suites, and contraction
//! constants.
//!
//! Exit codes: 0 success, 1 usage or parameter error, 2 numerical
//! consistency failure, 3 search interrupted (checkpoint written).

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use guesswork::analysis::{
    bec_majorization_case, check_r_n_monotone, curves_to_csv, default_delta_grid,
    default_epsilon_grid, generate_bec_figure, generate_bsc_figure, majority_convergence,
    verify_prop1, verify_prop2,
};
use guesswork::boolfn::{self, ErasureFunctionFamily, TruthTable};
use guesswork::bounds::{
    dictator_bound, fourier_bound, fourier_bound_simple, gdic_bound, majority_bound,
    maxent_bound, maxent_bound_improved, sdpi_constant, BoundValue,
};
use guesswork::channels::{reverse_channel, ChannelSpec};
use guesswork::exact::{
    exact_bec_moment, exact_bsc_moment, exhaustive_search_bec, exhaustive_search_bsc,
    ExactResult, SearchOptions, SearchOutcome,
};
use guesswork::moments::{FiniteDistribution, MomentOrder};
use guesswork::Error;

#[derive(Parser)]
#[command(
    name = "guesswork",
    version,
    about = "Guessing-moment bounds, exact helper moments, and exhaustive helper searches"
)]
struct Cli {
    /// Worker threads for searches and figure overlays (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one bound at one parameter point.
    Bound(BoundArgs),
    /// Write figure data (bound curves plus exact overlays) as CSV.
    Curves(CurvesArgs),
    /// Exact helped moment of a named or hex-encoded helper function.
    Exact(ExactArgs),
    /// Exhaustive minimum over all helper functions, with checkpointing.
    Search(SearchArgs),
    /// Verification suites; exits 2 if any check fails.
    Verify(VerifyArgs),
    /// Contraction constant of a channel given as a transition-matrix file.
    Sdpi(SdpiArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundKindArg {
    Dictator,
    Majority,
    Maxent,
    MaxentImproved,
    Fourier,
    FourierSimple,
    Gdic,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, value_enum)]
    kind: BoundKindArg,
    /// Moment order.
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    /// Crossover probability (symmetric-channel bounds).
    #[arg(long)]
    delta: Option<f64>,
    /// Erasure probability (gdic bound).
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FigureArg {
    Bsc,
    Bec,
}

#[derive(Args)]
struct CurvesArgs {
    #[arg(long, value_enum)]
    figure: FigureArg,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    /// Parameter grid as start:end:step (default: the figure's standard
    /// grid).
    #[arg(long)]
    grid: Option<String>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Include the conditional improved entropy lower bound.
    #[arg(long)]
    conditional_bounds: bool,
    /// Largest block length of the exhaustive-minimum overlay (0 disables;
    /// symmetric-channel figure only).
    #[arg(long, default_value_t = 4)]
    overlay_n: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChannelArg {
    Bsc,
    Bec,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long, value_enum)]
    channel: ChannelArg,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Block length.
    #[arg(long)]
    n: u32,
    /// Helper function: dictator | dictator-k:K | majority[:T] | parity |
    /// hex:HEX for the symmetric channel; gdic | majority for the erasure
    /// channel.
    #[arg(long)]
    f: String,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    /// Emit the result as JSON instead of key-value lines.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, value_enum)]
    channel: ChannelArg,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    /// Permit the largest supported block length (5 symmetric, 3 erasure).
    #[arg(long)]
    allow_large_n: bool,
    /// Checkpoint file for interruptible runs; resumed when compatible.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Also write the JSON report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    All,
    Prop1,
    Prop2,
    RnMonotone,
    Majorization,
    McMajority,
    Convergence,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Largest block length for the monotonicity sweep.
    #[arg(long, default_value_t = 50)]
    n_max: u32,
    /// Monte-Carlo sample count for the quadrature check.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Seed for randomized validators.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SdpiArgs {
    /// Plain-text transition matrix: first line `inputs outputs`, then one
    /// whitespace-separated row per input.
    #[arg(long)]
    file: PathBuf,
    /// Comma-separated input law (uniform if omitted).
    #[arg(long)]
    input_law: Option<String>,
    /// Analyze the file's channel as-is instead of reversing it first.
    #[arg(long)]
    direct: bool,
}

enum CliError {
    Usage(String),
    Consistency(String),
    Interrupted,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Interrupted => CliError::Interrupted,
            Error::Inconsistent(msg) => CliError::Consistency(msg),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Shortest representation that round-trips, always with a decimal point
/// (`0.6`, `1.0`).
fn fmt_f(x: f64) -> String {
    format!("{x:?}")
}

static INTERRUPT: OnceLock<Arc<AtomicBool>> = OnceLock::new();

extern "C" fn on_sigint(_: libc::c_int) {
    if let Some(flag) = INTERRUPT.get() {
        flag.store(true, Ordering::SeqCst);
    }
}

fn install_interrupt_flag() -> Arc<AtomicBool> {
    let flag = INTERRUPT
        .get_or_init(|| Arc::new(AtomicBool::new(false)))
        .clone();
    unsafe {
        libc::signal(
            libc::SIGINT,
            on_sigint as extern "C" fn(libc::c_int) as usize as libc::sighandler_t,
        );
    }
    flag
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own exit code conflates usage errors with --help; keep 0
            // for help/version and use 1 for genuine usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.threads > 0 {
        std::env::set_var("RAYON_NUM_THREADS", cli.threads.to_string());
    }
    let threads = cli.threads;
    let outcome = match cli.cmd {
        Cmd::Bound(a) => run_bound(a),
        Cmd::Curves(a) => run_curves(a),
        Cmd::Exact(a) => run_exact(a),
        Cmd::Search(a) => run_search(a, threads),
        Cmd::Verify(a) => run_verify(a),
        Cmd::Sdpi(a) => run_sdpi(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Consistency(msg)) => {
            eprintln!("consistency failure: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Interrupted) => {
            eprintln!("interrupted: checkpoint written");
            ExitCode::from(3)
        }
    }
}

fn need(opt: Option<f64>, what: &str) -> CliResult<f64> {
    opt.ok_or_else(|| CliError::Usage(format!("--{what} is required here")))
}

fn print_bound(b: &BoundValue) {
    println!("{}", fmt_f(b.value));
    if b.vacuous {
        eprintln!("note: bound is vacuous (<= 0) at this parameter");
    }
    if b.conditional {
        eprintln!("note: bound is conditional on an unproven improvement");
    }
    if let Some(l) = b.lambda {
        eprintln!("note: optimized exponent parameter {}", fmt_f(l));
    }
}

fn run_bound(a: BoundArgs) -> CliResult<()> {
    let s = MomentOrder::new(a.s)?;
    let b = match a.kind {
        BoundKindArg::Dictator => dictator_bound(need(a.delta, "delta")?, &s)?,
        BoundKindArg::Majority => majority_bound(need(a.delta, "delta")?, &s)?,
        BoundKindArg::Maxent => maxent_bound(need(a.delta, "delta")?, &s)?,
        BoundKindArg::MaxentImproved => maxent_bound_improved(need(a.delta, "delta")?, &s)?,
        BoundKindArg::Fourier => fourier_bound(need(a.delta, "delta")?, &s)?,
        BoundKindArg::FourierSimple => fourier_bound_simple(need(a.delta, "delta")?, &s)?,
        BoundKindArg::Gdic => gdic_bound(need(a.epsilon, "epsilon")?)?,
    };
    print_bound(&b);
    Ok(())
}

fn parse_grid(spec: Option<&str>, default: Vec<f64>) -> CliResult<Vec<f64>> {
    let Some(spec) = spec else {
        return Ok(default);
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, end, step] = parts.as_slice() else {
        return Err(CliError::Usage(format!(
            "grid {spec:?} is not start:end:step"
        )));
    };
    let parse = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| CliError::Usage(format!("bad grid number {t:?}")))
    };
    let (start, end, step) = (parse(start)?, parse(end)?, parse(step)?);
    if !(step > 0.0) || end < start {
        return Err(CliError::Usage("grid needs end >= start and step > 0".into()));
    }
    let count = ((end - start) / step).round() as u64;
    let grid: Vec<f64> = (0..=count).map(|k| start + k as f64 * step).collect();
    Ok(grid)
}

fn run_curves(a: CurvesArgs) -> CliResult<()> {
    let s = MomentOrder::new(a.s)?;
    let curves = match a.figure {
        FigureArg::Bsc => {
            let grid = parse_grid(a.grid.as_deref(), default_delta_grid())?;
            generate_bsc_figure(&s, &grid, a.conditional_bounds, a.overlay_n)?
        }
        FigureArg::Bec => {
            let grid = parse_grid(a.grid.as_deref(), default_epsilon_grid())?;
            generate_bec_figure(&s, &grid)?
        }
    };
    let csv = curves_to_csv(&curves);
    std::fs::write(&a.out, &csv)?;
    let rows: usize = curves.iter().map(|c| c.points.len()).sum();
    println!("wrote {} ({} curves, {} rows)", a.out.display(), curves.len(), rows);
    Ok(())
}

fn parse_bsc_function(n: u32, spec: &str) -> CliResult<TruthTable> {
    let f = match spec.split_once(':') {
        None => match spec {
            "dictator" => boolfn::dictator(n)?,
            "majority" => boolfn::majority(n, None)?,
            "parity" => boolfn::parity(n)?,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown function {other:?}; expected dictator, dictator-k:K, \
                     majority[:T], parity, or hex:HEX"
                )))
            }
        },
        Some(("dictator-k", k)) => {
            let k: u32 = k
                .parse()
                .map_err(|_| CliError::Usage(format!("bad coordinate {k:?}")))?;
            boolfn::dictator_k(n, k)?
        }
        Some(("majority", t)) => {
            let t: f64 = t
                .parse()
                .map_err(|_| CliError::Usage(format!("bad threshold {t:?}")))?;
            boolfn::majority(n, Some(t))?
        }
        Some(("hex", h)) => TruthTable::from_hex(n, h)?,
        Some((other, _)) => {
            return Err(CliError::Usage(format!("unknown function kind {other:?}")))
        }
    };
    Ok(f)
}

fn parse_bec_family(n: u32, spec: &str) -> CliResult<ErasureFunctionFamily> {
    match spec {
        "gdic" => Ok(ErasureFunctionFamily::gdic(n)?),
        "majority" => Ok(ErasureFunctionFamily::majority_family(n)?),
        other => Err(CliError::Usage(format!(
            "unknown family {other:?}; expected gdic or majority"
        ))),
    }
}

fn print_exact(r: &ExactResult, json: bool) -> CliResult<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(r)?);
        return Ok(());
    }
    println!("n {}", r.n);
    println!("s {}", fmt_f(r.s));
    match &r.channel {
        guesswork::exact::ChannelParam::Bsc { delta } => {
            println!("channel bsc");
            println!("delta {}", fmt_f(*delta));
        }
        guesswork::exact::ChannelParam::Bec { epsilon } => {
            println!("channel bec");
            println!("epsilon {}", fmt_f(*epsilon));
        }
    }
    println!("moment {}", fmt_f(r.moment));
    println!("helper_bias {}", fmt_f(r.helper_bias));
    println!("ratio {}", fmt_f(r.ratio));
    Ok(())
}

fn run_exact(a: ExactArgs) -> CliResult<()> {
    let s = MomentOrder::new(a.s)?;
    let result = match a.channel {
        ChannelArg::Bsc => {
            let delta = need(a.delta, "delta")?;
            let f = parse_bsc_function(a.n, &a.f)?;
            exact_bsc_moment(&f, delta, &s)?
        }
        ChannelArg::Bec => {
            let epsilon = need(a.epsilon, "epsilon")?;
            let fam = parse_bec_family(a.n, &a.f)?;
            exact_bec_moment(&fam, epsilon, &s)?
        }
    };
    print_exact(&result, a.json)
}

#[derive(Serialize)]
struct BecSearchReport<'a> {
    #[serde(flatten)]
    outcome: &'a SearchOutcome,
    gdic_attains: bool,
    gdic_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    minimizer_encodings: Option<Vec<String>>,
}

fn run_search(a: SearchArgs, threads: usize) -> CliResult<()> {
    let s = MomentOrder::new(a.s)?;
    let flag = install_interrupt_flag();
    let opts = SearchOptions {
        allow_large_n: a.allow_large_n,
        checkpoint_path: a.checkpoint.clone(),
        threads,
        interrupt: Some(flag),
    };
    let clock = Instant::now();
    let json = match a.channel {
        ChannelArg::Bsc => {
            let out = exhaustive_search_bsc(a.n, need(a.delta, "delta")?, &s, &opts)?;
            serde_json::to_string_pretty(&out.report)?
        }
        ChannelArg::Bec => {
            let out = exhaustive_search_bec(a.n, need(a.epsilon, "epsilon")?, &s, &opts)?;
            let report = BecSearchReport {
                outcome: &out.report,
                gdic_attains: out.gdic_attains,
                gdic_gap: out.gdic_gap,
                minimizer_encodings: out
                    .minimizers
                    .as_ref()
                    .map(|v| v.iter().map(|e| format!("{e:x}")).collect()),
            };
            serde_json::to_string_pretty(&report)?
        }
    };
    println!("{json}");
    if let Some(path) = &a.out {
        std::fs::write(path, format!("{json}\n"))?;
    }
    eprintln!("wall time {:.3}s", clock.elapsed().as_secs_f64());
    Ok(())
}

struct Check {
    label: String,
    pass: bool,
    detail: String,
}

fn check(label: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        label: label.into(),
        pass,
        detail: detail.into(),
    }
}

fn suite_prop1(n: u32, s: &MomentOrder) -> CliResult<Check> {
    let rep = verify_prop1(n, s)?;
    let detail = format!(
        "zero-noise minimizers {}/{} balanced, half-noise ties {}, monotone {}",
        rep.zero_noise_minimizers, rep.balanced_count, rep.half_noise_ties,
        rep.monotone_in_delta
    );
    Ok(check(
        format!("prop1 n={} s={}", n, fmt_f(s.value())),
        rep.passed(),
        detail,
    ))
}

fn suite_prop2(n: u32, eps: f64) -> CliResult<Check> {
    let rep = verify_prop2(n, eps)?;
    let detail = format!(
        "score-order gap {:.2e}, per-pattern min ok {}, {} patterns",
        rep.score_order_gap, rep.per_pattern_min_ok, rep.patterns_checked
    );
    Ok(check(
        format!("prop2 n={} epsilon={}", n, fmt_f(eps)),
        rep.passed(),
        detail,
    ))
}

fn suite_rn_monotone(n_max: u32) -> CliResult<Check> {
    let deltas: Vec<f64> = (0..=10).map(|k| k as f64 * 0.05).collect();
    let violation = check_r_n_monotone(n_max, &deltas)?;
    let detail = match violation {
        None => format!("n <= {n_max}, {} crossover values", deltas.len()),
        Some((n, w, d)) => format!("violated at n={n} w={w} delta={d}"),
    };
    Ok(check(
        format!("rn-monotone n_max={n_max}"),
        violation.is_none(),
        detail,
    ))
}

fn suite_majorization(n: u32, eps: f64) -> CliResult<Check> {
    let case = bec_majorization_case(n, eps)?;
    let detail = format!(
        "gdic {} vs majority {}, posteriors {:?}",
        fmt_f(case.gdic_moment),
        fmt_f(case.majority_moment),
        case.posterior_outcomes
    );
    Ok(check(
        format!("majorization n={n} epsilon={}", fmt_f(eps)),
        case.gdic_strictly_lower && case.incomparable,
        detail,
    ))
}

/// Monte-Carlo check of the Gaussian quadrature inside the majority bound:
/// draws standard normals and compares the sample mean of
/// `Q(beta z) (1 - Q(z))^s` against the quadrature value within four
/// standard errors.
fn suite_mc_majority(
    delta: f64,
    s: &MomentOrder,
    samples: u64,
    seed: u64,
) -> CliResult<Check> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(CliError::Usage(
            "the Monte-Carlo check needs 0 < delta <= 1/2".into(),
        ));
    }
    let bound = majority_bound(delta, s)?;
    let beta = (1.0 - 2.0 * delta) / (4.0 * delta * (1.0 - delta)).sqrt();
    let q = |z: f64| 0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    let mut drawn = 0u64;
    while drawn < samples {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        let (sin, cos) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        for z in [r * cos, r * sin] {
            if drawn == samples {
                break;
            }
            let g = q(beta * z) * s.rank_pow(1.0 - q(z));
            sum += g;
            sumsq += g * g;
            drawn += 1;
        }
    }
    let scale = 2.0 * (s.value() + 1.0);
    let mean = sum / samples as f64;
    let var = (sumsq / samples as f64 - mean * mean).max(0.0);
    let estimate = scale * mean;
    let stderr = scale * (var / samples as f64).sqrt();
    let diff = (estimate - bound.value).abs();
    let detail = format!(
        "quadrature {} vs mc {} ({} samples, seed {seed}), |diff| {:.2e} <= 4se {:.2e}",
        fmt_f(bound.value),
        fmt_f(estimate),
        samples,
        diff,
        4.0 * stderr
    );
    Ok(check(
        format!("mc-majority delta={} s={}", fmt_f(delta), fmt_f(s.value())),
        diff <= 4.0 * stderr + 1e-9,
        detail,
    ))
}

/// The odd-n majority ratios must close in on the Gaussian limit.
fn suite_convergence(delta: f64, s: &MomentOrder) -> CliResult<Check> {
    let ns: Vec<u32> = (0..13).map(|k| 2 * k + 1).collect();
    let table = majority_convergence(s, delta, &ns)?;
    let last = table.rows.last().map(|&(_, r)| r).unwrap_or(f64::NAN);
    let gap = (last - table.limit).abs();
    Ok(check(
        format!("convergence delta={} s={}", fmt_f(delta), fmt_f(s.value())),
        gap < 0.02,
        format!("ratio(25) {} vs limit {} (gap {:.2e})", fmt_f(last), fmt_f(table.limit), gap),
    ))
}

fn run_verify(a: VerifyArgs) -> CliResult<()> {
    let s = MomentOrder::new(a.s)?;
    let mut checks = Vec::new();
    match a.suite {
        SuiteArg::Prop1 => checks.push(suite_prop1(a.n.unwrap_or(3), &s)?),
        SuiteArg::Prop2 => {
            let n = a.n.unwrap_or(4);
            for eps in a.epsilon.map(|e| vec![e]).unwrap_or(vec![0.1, 0.3, 0.5]) {
                checks.push(suite_prop2(n, eps)?);
            }
        }
        SuiteArg::RnMonotone => checks.push(suite_rn_monotone(a.n_max)?),
        SuiteArg::Majorization => {
            checks.push(suite_majorization(a.n.unwrap_or(5), a.epsilon.unwrap_or(0.4))?)
        }
        SuiteArg::McMajority => checks.push(suite_mc_majority(
            a.delta.unwrap_or(0.1),
            &s,
            a.samples,
            a.seed,
        )?),
        SuiteArg::Convergence => {
            checks.push(suite_convergence(a.delta.unwrap_or(0.1), &s)?)
        }
        SuiteArg::All => {
            checks.push(suite_prop1(a.n.unwrap_or(3), &s)?);
            for eps in [0.1, 0.3, 0.5] {
                checks.push(suite_prop2(4, eps)?);
            }
            checks.push(suite_rn_monotone(a.n_max)?);
            checks.push(suite_majorization(5, 0.4)?);
            checks.push(suite_mc_majority(a.delta.unwrap_or(0.1), &s, a.samples, a.seed)?);
            checks.push(suite_convergence(a.delta.unwrap_or(0.1), &s)?);
        }
    }
    let mut failed = false;
    for c in &checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        println!("verify {}: {} — {}", c.label, verdict, c.detail);
        failed |= !c.pass;
    }
    if failed {
        return Err(CliError::Consistency("verification suite failed".into()));
    }
    Ok(())
}

fn parse_matrix_file(path: &PathBuf) -> CliResult<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> CliResult<usize> {
        tokens
            .next()
            .ok_or_else(|| CliError::Usage(format!("missing {what} count")))?
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("bad {what} count")))
    };
    let rows = dim("inputs")?;
    let cols = dim("outputs")?;
    if rows == 0 || cols == 0 {
        return Err(CliError::Usage("channel needs inputs and outputs".into()));
    }
    let mut matrix = vec![vec![0.0f64; cols]; rows];
    for (i, row) in matrix.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let t = tokens.next().ok_or_else(|| {
                CliError::Usage(format!("matrix ends before row {i} column {j}"))
            })?;
            *cell = t
                .parse()
                .map_err(|_| CliError::Usage(format!("bad probability {t:?}")))?;
        }
    }
    if tokens.next().is_some() {
        return Err(CliError::Usage("trailing tokens after the matrix".into()));
    }
    Ok(matrix)
}

fn parse_law(spec: Option<&str>, len: usize) -> CliResult<FiniteDistribution> {
    let Some(spec) = spec else {
        return Ok(FiniteDistribution::uniform(len)?);
    };
    let probs: Result<Vec<f64>, _> = spec.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let probs = probs.map_err(|_| CliError::Usage(format!("bad input law {spec:?}")))?;
    if probs.len() != len {
        return Err(CliError::Usage(format!(
            "input law has {} entries for {} inputs",
            probs.len(),
            len
        )));
    }
    Ok(FiniteDistribution::new(probs)?)
}

fn run_sdpi(a: SdpiArgs) -> CliResult<()> {
    let matrix = parse_matrix_file(&a.file)?;
    let law = parse_law(a.input_law.as_deref(), matrix.len())?;
    let channel = ChannelSpec::new(matrix, law)?;
    let est = if a.direct {
        sdpi_constant(&channel)?
    } else {
        sdpi_constant(&reverse_channel(&channel)?)?
    };
    println!("{}", fmt_f(est.eta));
    let mut q = String::new();
    for (i, v) in est.best_q.iter().enumerate() {
        if i > 0 {
            q.push(' ');
        }
        let _ = write!(q, "{}", fmt_f(*v));
    }
    eprintln!(
        "grid resolution {}, refinement steps {}, best law [{}]",
        est.grid_resolution, est.refinement_steps, q
    );
    Ok(())
}
