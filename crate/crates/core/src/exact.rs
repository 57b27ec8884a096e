//! Exact finite-n helper moments and exhaustive searches over helper
//! functions.
//!
//! For a uniform `X^n` observed through a memoryless channel and a one-bit
//! helper `f`, the helped moment is
//! `G_s(X^n | f) = sum_b P(f=b) G_s(posterior given b)`, each branch guessed
//! optimally. Everything here reports both the raw moment and its ratio to
//! the unhelped uniform moment `K_s(0, 2^n)`.

use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolfn::{compress_index, ErasureFunctionFamily, TruthTable};
use crate::channels::{bec_joint_weights_internal, bsc_noisy_truthtable_mean, BecSpec, BscSpec};
use crate::moments::{k_sum, MomentOrder};
use crate::numeric::Acc;
use crate::{Error, Result};

/// Largest `n` for the direct BSC evaluator (two sorts of `2^n` posteriors).
pub const MAX_EXACT_BSC_N: u32 = 20;
/// Largest `n` for the direct BEC family evaluator (`2^n` patterns times
/// `2^n` inputs).
pub const MAX_EXACT_BEC_N: u32 = 14;
/// Largest odd `n` for the weight-class majority evaluator.
pub const MAX_MAJORITY_N: u32 = 25;
/// Candidates per checkpointed work chunk in exhaustive search.
pub const SEARCH_CHUNK: u64 = 1 << 24;

/// Which channel a result refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChannelParam {
    Bsc { delta: f64 },
    Bec { epsilon: f64 },
}

/// An exactly evaluated helped guessing moment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub n: u32,
    pub s: f64,
    pub channel: ChannelParam,
    /// `G_s(X^n | f)` with optimal guessing in each helper branch.
    pub moment: f64,
    /// `P(f = 1)`.
    pub helper_bias: f64,
    /// `moment / K_s(0, 2^n)`; lies in `(0, 1]` up to rounding.
    pub ratio: f64,
}

/// Sum of `w_(j) * (j+1)^s` over weights sorted in decreasing order — the
/// branch contribution to a helped moment, up to normalization.
fn sorted_rank_sum(w: &mut [f64], s: &MomentOrder) -> f64 {
    w.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut acc = Acc::new();
    for (j, &v) in w.iter().enumerate() {
        if v > 0.0 {
            acc.add(v * s.rank_pow((j + 1) as f64));
        }
    }
    acc.total()
}

fn finish_result(
    n: u32,
    s: &MomentOrder,
    channel: ChannelParam,
    moment: f64,
    helper_bias: f64,
) -> Result<ExactResult> {
    let base = k_sum(0, 1u64 << n, s)?.value;
    let ratio = moment / base;
    if !(0.0..=1.0 + 1e-9).contains(&ratio) {
        return Err(Error::Inconsistent(format!(
            "helped-to-unhelped ratio {ratio} outside (0, 1]"
        )));
    }
    Ok(ExactResult {
        n,
        s: s.value(),
        channel,
        moment,
        helper_bias,
        ratio,
    })
}

/// `G_s(X^n | f(Y^n))` for `Y^n` the BSC(delta) observation of uniform
/// `X^n`. The two posteriors come from the noise-smoothed table:
/// `P(x, f=b) = 2^-(n+1) (1 + sign(b) T_rho f(x))`.
pub fn exact_bsc_moment(f: &TruthTable, delta: f64, s: &MomentOrder) -> Result<ExactResult> {
    let n = f.n();
    if n == 0 || n > MAX_EXACT_BSC_N {
        return Err(Error::TooLarge {
            context: "exact bsc moment",
            n,
            max: MAX_EXACT_BSC_N,
        });
    }
    let spec = BscSpec::new(delta)?;
    let t = bsc_noisy_truthtable_mean(f, spec.rho())?;
    let m = t.len();
    let mut w_plus: Vec<f64> = t.iter().map(|&v| 1.0 + v).collect();
    let mut w_minus: Vec<f64> = t.iter().map(|&v| 1.0 - v).collect();
    let mut bias = Acc::new();
    for &v in &w_minus {
        bias.add(v);
    }
    // sign -1 encodes f = 1
    let helper_bias = bias.total() / (2.0 * m as f64);
    let branch_sum = sorted_rank_sum(&mut w_plus, s) + sorted_rank_sum(&mut w_minus, s);
    let moment = branch_sum / (2.0 * m as f64);
    finish_result(n, s, ChannelParam::Bsc { delta }, moment, helper_bias)
}

/// `G_s(X^n | f)` for a pattern-indexed family over the BEC(epsilon).
pub fn exact_bec_moment(
    fam: &ErasureFunctionFamily,
    epsilon: f64,
    s: &MomentOrder,
) -> Result<ExactResult> {
    let n = fam.n();
    if n > MAX_EXACT_BEC_N {
        return Err(Error::TooLarge {
            context: "exact bec moment",
            n,
            max: MAX_EXACT_BEC_N,
        });
    }
    let (mut w1, mut w0) = bec_joint_weights_internal(fam, epsilon)?;
    let m = w1.len() as f64;
    let mut bias = Acc::new();
    for &v in &w1 {
        bias.add(v);
    }
    let helper_bias = bias.total() / m;
    let branch_sum = sorted_rank_sum(&mut w1, s) + sorted_rank_sum(&mut w0, s);
    let moment = branch_sum / m;
    finish_result(n, s, ChannelParam::Bec { epsilon }, moment, helper_bias)
}

/// Average guessing time `G_1(X^n | gdic)` of the greedy dictator over the
/// BEC in closed form:
/// `(2^(n-1) - eps^n/2) / (2 - eps) + (1 + eps^n) / 2`.
/// Exact for `eps <= 1/2` (where each branch's score order is optimal); an
/// upper bound on the optimal-order moment for larger `eps`.
pub fn gdic_moment_closed_form(n: u32, epsilon: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("gdic closed form needs n >= 1"));
    }
    BecSpec::new(epsilon)?;
    let half = (1u64 << (n - 1)) as f64;
    let en = epsilon.powi(n as i32);
    Ok((half - en / 2.0) / (2.0 - epsilon) + (1.0 + en) / 2.0)
}

/// The same average computed from the pattern decomposition
/// `2^-n [ sum_{S != empty} P(S) sum_c pord_{picked}(c) + eps^n K_1(2^n) 2^... ]`:
/// each surviving pattern contributes the projected rank mass of the branch
/// the greedy dictator picks, and the all-erased coin contributes the
/// unhelped moment. Runs in `O(3^n)` table entries; `n <= 16`.
pub fn gdic_moment_by_patterns(n: u32, epsilon: f64) -> Result<f64> {
    if n == 0 || n > 16 {
        return Err(Error::TooLarge {
            context: "gdic pattern decomposition",
            n,
            max: 16,
        });
    }
    BecSpec::new(epsilon)?;
    let ord0 = crate::boolfn::gdic_order(n, epsilon, false)?;
    let ord1 = crate::boolfn::gdic_order(n, epsilon, true)?;
    let m = 1u64 << n;
    let mut acc = Acc::new();
    for mask in 1..m {
        let k = mask.count_ones();
        let pr = (1.0 - epsilon).powi(k as i32) * epsilon.powi((n - k) as i32);
        if pr == 0.0 {
            continue;
        }
        let p0 = crate::boolfn::projected_order(&ord0, n, mask)?;
        let p1 = crate::boolfn::projected_order(&ord1, n, mask)?;
        let mut rank_mass = 0u64;
        for c in 0..p0.len() {
            // compressed position 0 is the smallest surviving coordinate
            rank_mass += if c & 1 == 1 { p1[c] } else { p0[c] };
        }
        acc.add(pr * rank_mass as f64);
    }
    // all-erased: fair coin, both branch orders cover all of 1..=2^n
    let total_ranks = (m * (m + 1) / 2) as f64;
    acc.add(epsilon.powi(n as i32) * total_ranks);
    Ok(acc.total() / m as f64)
}

fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        c = c * (n as u128 - i) / (i + 1);
    }
    c as u64
}

/// `P(Bin(w, 1-delta) + Bin(n-w, delta) > n/2)`: the probability that
/// majority voting over the BSC outputs 1 when the input has Hamming weight
/// `w`.
pub fn r_n(n: u32, w: u32, delta: f64) -> Result<f64> {
    if n == 0 || w > n {
        return Err(Error::Domain("r_n needs n >= 1 and w <= n"));
    }
    BscSpec::new(delta)?;
    let pmf = |m: u32, p: f64| -> Vec<f64> {
        (0..=m)
            .map(|j| {
                binomial(m, j) as f64 * p.powi(j as i32) * (1.0 - p).powi((m - j) as i32)
            })
            .collect()
    };
    let a = pmf(w, 1.0 - delta);
    let b = pmf(n - w, delta);
    let mut acc = Acc::new();
    for (j, &pa) in a.iter().enumerate() {
        for (k, &pb) in b.iter().enumerate() {
            if 2 * (j + k) as u32 > n {
                acc.add(pa * pb);
            }
        }
    }
    Ok(acc.total().clamp(0.0, 1.0))
}

/// `G_s(X^n | majority)` for odd `n` via weight classes, never materializing
/// the `2^n` posterior. Given the vote, inputs are guessed class by class
/// (all of weight `w` before anything of weight `w - 1` when the vote is 1),
/// and each class occupies one contiguous block of ranks:
/// `G_s = sum_w 2^(1-n) (1 - r_n(w)) sum_{i = M_(w-1)+1}^{M_w} i^s`
/// with `M_w` the cumulative count of inputs of weight `<= w`.
pub fn majority_moment_by_weight(n: u32, delta: f64, s: &MomentOrder) -> Result<ExactResult> {
    if n % 2 == 0 {
        return Err(Error::Domain(
            "weight-class majority needs odd n (no tie votes)",
        ));
    }
    if n > MAX_MAJORITY_N {
        return Err(Error::TooLarge {
            context: "weight-class majority",
            n,
            max: MAX_MAJORITY_N,
        });
    }
    BscSpec::new(delta)?;
    let scale = 2.0f64.powi(1 - n as i32);
    let mut acc = Acc::new();
    let mut cum = 0u64;
    for w in 0..=n {
        let c = binomial(n, w);
        let against = 1.0 - r_n(n, w, delta)?;
        let block = k_sum(cum, cum + c, s)?;
        acc.add(scale * against * c as f64 * block.value);
        cum += c;
    }
    finish_result(
        n,
        s,
        ChannelParam::Bsc { delta },
        acc.total(),
        0.5,
    )
}

/// Endpoint bracket for the weight-class moment: replaces every rank in the
/// weight-`w` block by the block's outer endpoints `M_(w-1)` and `M_w`.
pub fn majority_weight_bracket(n: u32, delta: f64, s: &MomentOrder) -> Result<(f64, f64)> {
    if n % 2 == 0 || n > MAX_MAJORITY_N {
        return Err(Error::Domain("bracket needs odd n within the size limit"));
    }
    BscSpec::new(delta)?;
    let scale = 2.0f64.powi(1 - n as i32);
    let mut lo = Acc::new();
    let mut hi = Acc::new();
    let mut cum = 0u64;
    for w in 0..=n {
        let c = binomial(n, w) as f64;
        let against = 1.0 - r_n(n, w, delta)?;
        lo.add(scale * against * c * s.rank_pow(cum as f64));
        cum += binomial(n, w);
        hi.add(scale * against * c * s.rank_pow(cum as f64));
    }
    Ok((lo.total(), hi.total()))
}

/// Outcome of an exhaustive search, serializable as the search report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub n: u32,
    pub s: f64,
    pub channel: ChannelParam,
    pub best_function_hex: String,
    pub moment: f64,
    pub ratio: f64,
    pub candidates_evaluated: u64,
    /// Seconds of wall time. Not serialized: reports for identical configs
    /// must be byte-identical.
    #[serde(skip, default)]
    pub wall_time: f64,
}

/// Knobs for exhaustive searches. The default searches the small-`n` space
/// on the current rayon pool without checkpointing.
#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    /// Permits the biggest supported `n` (5 for the BSC, 3 for the BEC),
    /// which switches on symmetry reduction.
    pub allow_large_n: bool,
    /// Checkpoint file, written after every [`SEARCH_CHUNK`] candidates and
    /// read back to resume a matching interrupted search.
    pub checkpoint_path: Option<std::path::PathBuf>,
    /// Worker threads; 0 uses the ambient rayon pool.
    pub threads: usize,
    /// Cooperative interruption: when set, the search stops at the next
    /// chunk boundary, writes a checkpoint, and returns
    /// [`Error::Interrupted`].
    pub interrupt: Option<Arc<AtomicBool>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointState {
    version: u32,
    n: u32,
    s: f64,
    channel: ChannelParam,
    next_index: u64,
    /// Absent until the first chunk finds anything (JSON has no infinity).
    best_encoding: Option<u64>,
    best_moment: Option<f64>,
    candidates_evaluated: u64,
}

fn write_checkpoint(path: &Path, state: &CheckpointState) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let body = serde_json::to_string_pretty(state)
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
    std::fs::write(&tmp, body).map_err(|e| Error::Checkpoint(e.to_string()))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::Checkpoint(e.to_string()))
}

fn read_checkpoint(path: &Path) -> Result<Option<CheckpointState>> {
    match std::fs::read_to_string(path) {
        Ok(body) => {
            let state: CheckpointState =
                serde_json::from_str(&body).map_err(|e| Error::Checkpoint(e.to_string()))?;
            Ok(Some(state))
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::Checkpoint(e.to_string())),
    }
}

fn channel_matches(a: &ChannelParam, b: &ChannelParam) -> bool {
    match (a, b) {
        (ChannelParam::Bsc { delta: x }, ChannelParam::Bsc { delta: y }) => x == y,
        (ChannelParam::Bec { epsilon: x }, ChannelParam::Bec { epsilon: y }) => x == y,
        _ => false,
    }
}

/// Coordinate permutations of `0..n` in a deterministic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut cur, &mut out);
    out.sort();
    out
}

/// Table-index remaps realizing every coordinate permutation: entry `x` of a
/// map is the index whose bit pattern is the permuted `x`.
fn table_index_maps(n: u32) -> Vec<Vec<u32>> {
    let m = 1u64 << n;
    permutations(n as usize)
        .into_iter()
        .map(|perm| {
            (0..m)
                .map(|x| {
                    let mut y = 0u64;
                    for (j, &p) in perm.iter().enumerate() {
                        y |= (x >> p & 1) << j;
                    }
                    y as u32
                })
                .collect()
        })
        .collect()
}

fn apply_table_map(enc: u64, map: &[u32]) -> u64 {
    let mut out = 0u64;
    for (x, &src) in map.iter().enumerate() {
        out |= (enc >> src & 1) << x;
    }
    out
}

/// True when `enc` is the smallest encoding in its orbit under coordinate
/// permutations and output complement.
fn bsc_is_canonical(enc: u64, bits: u32, maps: &[Vec<u32>]) -> bool {
    let full = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    if !enc & full < enc {
        return false;
    }
    for map in maps {
        let t = apply_table_map(enc, map);
        if t < enc || !t & full < enc {
            return false;
        }
    }
    true
}

/// Helped moment of the truth table encoded in the low `2^n` bits of `enc`
/// (bit `x` is `f(x)`), with everything kept on the stack. `n <= 5`.
fn eval_bsc_encoding(n: u32, rho: f64, s: &MomentOrder, enc: u64) -> f64 {
    let m = 1usize << n;
    let mut v = [0.0f64; 32];
    for (x, slot) in v.iter_mut().enumerate().take(m) {
        *slot = if enc >> x & 1 == 1 { -1.0 } else { 1.0 };
    }
    // in-place transform, per-level scale, inverse transform
    crate::boolfn::wht(&mut v[..m]);
    let mut pow = [1.0f64; 6];
    for i in 1..=n as usize {
        pow[i] = pow[i - 1] * rho;
    }
    for (mask, slot) in v.iter_mut().enumerate().take(m) {
        *slot *= pow[mask.count_ones() as usize];
    }
    crate::boolfn::wht(&mut v[..m]);
    let scale = 1.0 / m as f64;
    let mut wp = [0.0f64; 32];
    let mut wm = [0.0f64; 32];
    for x in 0..m {
        let t = v[x] * scale;
        wp[x] = 1.0 + t;
        wm[x] = 1.0 - t;
    }
    let total = sorted_rank_sum(&mut wp[..m], s) + sorted_rank_sum(&mut wm[..m], s);
    total / (2.0 * m as f64)
}

struct ChunkBest {
    moment: f64,
    encoding: u64,
    evaluated: u64,
}

fn run_chunked_search<F>(
    total: u64,
    start: u64,
    init_best: (f64, u64),
    init_evaluated: u64,
    opts: &SearchOptions,
    mut on_checkpoint: impl FnMut(u64, (f64, u64), u64) -> Result<()>,
    eval_chunk: F,
) -> Result<(f64, u64, u64)>
where
    F: Fn(u64, u64) -> ChunkBest + Sync,
{
    let mut best = init_best;
    let mut evaluated = init_evaluated;
    let mut next = start;
    while next < total {
        if let Some(flag) = &opts.interrupt {
            if flag.load(Ordering::Relaxed) {
                on_checkpoint(next, best, evaluated)?;
                return Err(Error::Interrupted);
            }
        }
        let end = total.min(next + SEARCH_CHUNK);
        let chunk = eval_chunk(next, end);
        evaluated += chunk.evaluated;
        if (chunk.moment, chunk.encoding) < best {
            best = (chunk.moment, chunk.encoding);
        }
        next = end;
        if next < total {
            on_checkpoint(next, best, evaluated)?;
        }
    }
    Ok((best.0, best.1, evaluated))
}

fn with_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        Ok(job())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Inconsistent(format!("thread pool: {e}")))?;
        Ok(pool.install(job))
    }
}

/// A finished BSC search: the winning table, its moment re-derived by the
/// reference evaluator, and the raw search report.
#[derive(Debug, Clone)]
pub struct BscSearch {
    pub best: TruthTable,
    pub exact: ExactResult,
    pub report: SearchOutcome,
}

/// Minimizes the helped moment over every Boolean function on `n` bits for
/// the BSC. Ties at equal moments resolve to the smallest table encoding.
/// `n <= 4` runs the full `2^(2^n)` enumeration; `n = 5` (behind
/// `allow_large_n`) evaluates canonical representatives only, in chunks of
/// [`SEARCH_CHUNK`] with optional checkpoint/resume.
pub fn exhaustive_search_bsc(
    n: u32,
    delta: f64,
    s: &MomentOrder,
    opts: &SearchOptions,
) -> Result<BscSearch> {
    let max = if opts.allow_large_n { 5 } else { 4 };
    if n == 0 || n > max {
        return Err(Error::TooLarge {
            context: "bsc search",
            n,
            max,
        });
    }
    let spec = BscSpec::new(delta)?;
    let channel = ChannelParam::Bsc { delta };
    let bits = 1u32 << n;
    let total = if bits == 64 { u64::MAX } else { 1u64 << bits };
    let reduce_symmetry = n == 5;
    let maps = if reduce_symmetry {
        table_index_maps(n)
    } else {
        Vec::new()
    };

    let mut start = 0u64;
    let mut best = (f64::INFINITY, u64::MAX);
    let mut evaluated = 0u64;
    if let Some(path) = &opts.checkpoint_path {
        if let Some(state) = read_checkpoint(path)? {
            if state.version != 1
                || state.n != n
                || state.s != s.value()
                || !channel_matches(&state.channel, &channel)
            {
                return Err(Error::Checkpoint(
                    "existing checkpoint is for different search parameters".into(),
                ));
            }
            start = state.next_index;
            if let (Some(m), Some(e)) = (state.best_moment, state.best_encoding) {
                best = (m, e);
            }
            evaluated = state.candidates_evaluated;
        }
    }

    let clock = Instant::now();
    let rho = spec.rho();
    let maps_ref = &maps;
    let (moment, encoding, evaluated) = with_pool(opts.threads, || {
        run_chunked_search(
            total,
            start,
            best,
            evaluated,
            opts,
            |next, chunk_best, count| {
                if let Some(path) = &opts.checkpoint_path {
                    let found = chunk_best.0.is_finite();
                    write_checkpoint(
                        path,
                        &CheckpointState {
                            version: 1,
                            n,
                            s: s.value(),
                            channel,
                            next_index: next,
                            best_encoding: found.then_some(chunk_best.1),
                            best_moment: found.then_some(chunk_best.0),
                            candidates_evaluated: count,
                        },
                    )?;
                }
                Ok(())
            },
            |lo, hi| {
                let (moment, encoding, evaluated) = (lo..hi)
                    .into_par_iter()
                    .map(|enc| {
                        if reduce_symmetry && !bsc_is_canonical(enc, bits, maps_ref) {
                            (f64::INFINITY, u64::MAX, 0u64)
                        } else {
                            (eval_bsc_encoding(n, rho, s, enc), enc, 1)
                        }
                    })
                    .reduce(
                        || (f64::INFINITY, u64::MAX, 0),
                        |a, b| {
                            let best = if (b.0, b.1) < (a.0, a.1) {
                                (b.0, b.1)
                            } else {
                                (a.0, a.1)
                            };
                            (best.0, best.1, a.2 + b.2)
                        },
                    );
                ChunkBest {
                    moment,
                    encoding,
                    evaluated,
                }
            },
        )
    })??;

    if let Some(path) = &opts.checkpoint_path {
        match std::fs::remove_file(path) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(Error::Checkpoint(e.to_string())),
        }
    }
    let table = TruthTable::from_fn(n, |x| encoding >> x & 1 == 1)?;
    let exact = exact_bsc_moment(&table, delta, s)?;
    if (exact.moment - moment).abs() > 1e-9 * exact.moment.max(1.0) {
        return Err(Error::Inconsistent(format!(
            "search evaluator disagrees with reference: {moment} vs {}",
            exact.moment
        )));
    }
    let base = k_sum(0, 1u64 << n, s)?.value;
    let report = SearchOutcome {
        n,
        s: s.value(),
        channel,
        best_function_hex: table.to_hex(),
        moment,
        ratio: moment / base,
        candidates_evaluated: evaluated,
        wall_time: clock.elapsed().as_secs_f64(),
    };
    Ok(BscSearch {
        best: table,
        exact,
        report,
    })
}

/// The minimum helped moment over all functions at `n <= 4`, together with
/// every encoding attaining it within relative `tol`.
pub fn bsc_minimum_set(
    n: u32,
    delta: f64,
    s: &MomentOrder,
    tol: f64,
) -> Result<(f64, Vec<u64>)> {
    if n == 0 || n > 4 {
        return Err(Error::TooLarge {
            context: "bsc minimum set",
            n,
            max: 4,
        });
    }
    let spec = BscSpec::new(delta)?;
    let total = 1u64 << (1u32 << n);
    let rho = spec.rho();
    let min = (0..total)
        .into_par_iter()
        .map(|enc| eval_bsc_encoding(n, rho, s, enc))
        .reduce(|| f64::INFINITY, f64::min);
    let hits: Vec<u64> = (0..total)
        .filter(|&enc| {
            let m = eval_bsc_encoding(n, rho, s, enc);
            m <= min * (1.0 + tol)
        })
        .collect();
    Ok((min, hits))
}

/// Number of assignment bits for a deterministic pattern family on `n`
/// coordinates: `sum_S 2^|S| = 3^n`, including 1 bit for the empty pattern.
pub fn bec_encoding_bits(n: u32) -> u32 {
    3u32.pow(n)
}

/// Bit offset of each pattern's table inside a family encoding.
fn bec_offsets(n: u32) -> Vec<u32> {
    let m = 1usize << n;
    let mut offs = vec![0u32; m + 1];
    for mask in 0..m {
        offs[mask + 1] = offs[mask] + (1u32 << (mask as u64).count_ones());
    }
    offs
}

/// Materializes the deterministic family encoded in `enc` (bit layout:
/// patterns in ascending mask order, each table's compressed inputs in
/// ascending order, the empty pattern a fixed bit at offset 0).
pub fn bec_family_from_encoding(n: u32, enc: u64) -> Result<ErasureFunctionFamily> {
    if n == 0 || n > 3 {
        return Err(Error::TooLarge {
            context: "bec family encoding",
            n,
            max: 3,
        });
    }
    let offs = bec_offsets(n);
    let empty = crate::boolfn::EmptyPattern::Fixed(enc & 1 == 1);
    ErasureFunctionFamily::from_rule(n, empty, |mask| {
        let off = offs[mask as usize];
        TruthTable::from_fn(mask.count_ones(), |c| enc >> (off + c as u32) & 1 == 1)
    })
}

/// Encoding of a deterministic family (empty pattern must be `Fixed`).
pub fn bec_family_to_encoding(fam: &ErasureFunctionFamily) -> Result<u64> {
    let n = fam.n();
    if n > 3 {
        return Err(Error::TooLarge {
            context: "bec family encoding",
            n,
            max: 3,
        });
    }
    let offs = bec_offsets(n);
    let mut enc = 0u64;
    match fam.empty_pattern() {
        crate::boolfn::EmptyPattern::Fixed(b) => {
            if b {
                enc |= 1;
            }
        }
        crate::boolfn::EmptyPattern::FairCoin => {
            return Err(Error::Domain("fair-coin family has no deterministic encoding"));
        }
    }
    for mask in 1..(1u64 << n) {
        let t = fam.table(mask);
        for c in 0..t.len() {
            if t.get(c) {
                enc |= 1u64 << (offs[mask as usize] + c as u32);
            }
        }
    }
    Ok(enc)
}

/// Helped moment of the encoded family, stack-only; `n <= 3`.
fn eval_bec_encoding(
    n: u32,
    pattern_prob: &[f64],
    offs: &[u32],
    s: &MomentOrder,
    enc: u64,
) -> f64 {
    let m = 1usize << n;
    let mut w1 = [0.0f64; 8];
    let mut w0 = [0.0f64; 8];
    for x in 0..m {
        let mut a = 0.0f64;
        for (mask, &p) in pattern_prob.iter().enumerate().take(m) {
            if p > 0.0 {
                let c = compress_index(x as u64, mask as u64);
                if enc >> (offs[mask] + c as u32) & 1 == 1 {
                    a += p;
                }
            }
        }
        w1[x] = a;
        w0[x] = 1.0 - a;
    }
    let total = sorted_rank_sum(&mut w1[..m], s) + sorted_rank_sum(&mut w0[..m], s);
    total / m as f64
}

/// Encoding-position remaps realizing coordinate permutations of a family
/// encoding: entry `j` of a map is the source bit for destination bit `j`.
fn bec_position_maps(n: u32) -> Vec<Vec<u32>> {
    let m = 1u64 << n;
    let offs = bec_offsets(n);
    permutations(n as usize)
        .into_iter()
        .map(|perm| {
            // perm[j] = p: destination coordinate j carries source coordinate p
            let mut map = vec![0u32; bec_encoding_bits(n) as usize];
            for mask in 0..m {
                // source pattern: image of this mask under the permutation
                let mut src_mask = 0u64;
                for (j, &p) in perm.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        src_mask |= 1 << p;
                    }
                }
                let kbits = mask.count_ones();
                for c in 0..(1u64 << kbits) {
                    // expand compressed input on `mask`, permute, recompress
                    let mut src_x = 0u64;
                    let mut pos = 0;
                    for j in 0..n as usize {
                        if mask >> j & 1 == 1 {
                            if c >> pos & 1 == 1 {
                                src_x |= 1 << perm[j];
                            }
                            pos += 1;
                        }
                    }
                    let src_c = compress_index(src_x, src_mask);
                    map[(offs[mask as usize] + c as u32) as usize] =
                        offs[src_mask as usize] + src_c as u32;
                }
            }
            map
        })
        .collect()
}

fn apply_position_map(enc: u64, map: &[u32]) -> u64 {
    let mut out = 0u64;
    for (dst, &src) in map.iter().enumerate() {
        out |= (enc >> src & 1) << dst;
    }
    out
}

fn bec_is_canonical(enc: u64, bits: u32, maps: &[Vec<u32>]) -> bool {
    let full = (1u64 << bits) - 1;
    if !enc & full < enc {
        return false;
    }
    for map in maps {
        let t = apply_position_map(enc, map);
        if t < enc || !t & full < enc {
            return false;
        }
    }
    true
}

/// A finished BEC family search.
#[derive(Debug, Clone)]
pub struct BecSearch {
    pub best: ErasureFunctionFamily,
    pub exact: ExactResult,
    pub report: SearchOutcome,
    /// Whether some relabeling/complement of the greedy dictator attains the
    /// minimum (within 1e-12 relative).
    pub gdic_attains: bool,
    /// `best gdic-orbit moment - search minimum` (nonnegative when the
    /// search includes the orbit).
    pub gdic_gap: f64,
    /// All minimizing encodings, collected only for `n <= 2`.
    pub minimizers: Option<Vec<u64>>,
}

/// Encodings of every coordinate relabeling of the greedy dictator, both
/// output complements, both fixed empty-pattern bits.
pub fn gdic_orbit_encodings(n: u32) -> Result<Vec<u64>> {
    if n == 0 || n > 3 {
        return Err(Error::TooLarge {
            context: "gdic orbit",
            n,
            max: 3,
        });
    }
    let offs = bec_offsets(n);
    let bits = bec_encoding_bits(n);
    let full = (1u64 << bits) - 1;
    let mut out = std::collections::BTreeSet::new();
    for perm in permutations(n as usize) {
        // relabeled greedy dictator: on pattern S output the survivor whose
        // relabeled index is smallest
        let mut enc = 0u64;
        for mask in 1u64..(1 << n) {
            let chosen = (0..n as usize)
                .filter(|&i| mask >> i & 1 == 1)
                .min_by_key(|&i| perm[i])
                .unwrap();
            let cpos = compress_index(1 << chosen, mask).trailing_zeros();
            let t = mask.count_ones();
            for c in 0..(1u64 << t) {
                if c >> cpos & 1 == 1 {
                    enc |= 1u64 << (offs[mask as usize] + c as u32);
                }
            }
        }
        for empty_bit in [0u64, 1] {
            let e = enc | empty_bit;
            out.insert(e);
            out.insert(!e & full);
        }
    }
    Ok(out.into_iter().collect())
}

/// Minimizes the helped moment over all `2^(3^n)` deterministic pattern
/// families for the BEC. `n <= 2` by default; `n = 3` (behind
/// `allow_large_n`) evaluates canonical representatives only. The fair-coin
/// empty pattern is covered implicitly: replacing the coin by either fixed
/// bit provably leaves the moment unchanged.
pub fn exhaustive_search_bec(
    n: u32,
    epsilon: f64,
    s: &MomentOrder,
    opts: &SearchOptions,
) -> Result<BecSearch> {
    let max = if opts.allow_large_n { 3 } else { 2 };
    if n == 0 || n > max {
        return Err(Error::TooLarge {
            context: "bec search",
            n,
            max,
        });
    }
    BecSpec::new(epsilon)?;
    let channel = ChannelParam::Bec { epsilon };
    let bits = bec_encoding_bits(n);
    let total = 1u64 << bits;
    let m = 1usize << n;
    let offs = bec_offsets(n);
    let mut pattern_prob = vec![0.0f64; m];
    for (mask, p) in pattern_prob.iter_mut().enumerate() {
        let k = mask.count_ones();
        *p = (1.0 - epsilon).powi(k as i32) * epsilon.powi((n - k) as i32);
    }
    let reduce_symmetry = n == 3;
    let maps = if reduce_symmetry {
        bec_position_maps(n)
    } else {
        Vec::new()
    };

    let mut start = 0u64;
    let mut best = (f64::INFINITY, u64::MAX);
    let mut evaluated = 0u64;
    if let Some(path) = &opts.checkpoint_path {
        if let Some(state) = read_checkpoint(path)? {
            if state.version != 1
                || state.n != n
                || state.s != s.value()
                || !channel_matches(&state.channel, &channel)
            {
                return Err(Error::Checkpoint(
                    "existing checkpoint is for different search parameters".into(),
                ));
            }
            start = state.next_index;
            if let (Some(m), Some(e)) = (state.best_moment, state.best_encoding) {
                best = (m, e);
            }
            evaluated = state.candidates_evaluated;
        }
    }

    let clock = Instant::now();
    let pattern_prob_ref = &pattern_prob;
    let offs_ref = &offs;
    let maps_ref = &maps;
    let (moment, encoding, evaluated) = with_pool(opts.threads, || {
        run_chunked_search(
            total,
            start,
            best,
            evaluated,
            opts,
            |next, chunk_best, count| {
                if let Some(path) = &opts.checkpoint_path {
                    let found = chunk_best.0.is_finite();
                    write_checkpoint(
                        path,
                        &CheckpointState {
                            version: 1,
                            n,
                            s: s.value(),
                            channel,
                            next_index: next,
                            best_encoding: found.then_some(chunk_best.1),
                            best_moment: found.then_some(chunk_best.0),
                            candidates_evaluated: count,
                        },
                    )?;
                }
                Ok(())
            },
            |lo, hi| {
                let (moment, encoding, evaluated) = (lo..hi)
                    .into_par_iter()
                    .map(|enc| {
                        if reduce_symmetry && !bec_is_canonical(enc, bits, maps_ref) {
                            (f64::INFINITY, u64::MAX, 0u64)
                        } else {
                            (
                                eval_bec_encoding(n, pattern_prob_ref, offs_ref, s, enc),
                                enc,
                                1,
                            )
                        }
                    })
                    .reduce(
                        || (f64::INFINITY, u64::MAX, 0),
                        |a, b| {
                            let best = if (b.0, b.1) < (a.0, a.1) {
                                (b.0, b.1)
                            } else {
                                (a.0, a.1)
                            };
                            (best.0, best.1, a.2 + b.2)
                        },
                    );
                ChunkBest {
                    moment,
                    encoding,
                    evaluated,
                }
            },
        )
    })??;

    if let Some(path) = &opts.checkpoint_path {
        match std::fs::remove_file(path) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(Error::Checkpoint(e.to_string())),
        }
    }
    let best_family = bec_family_from_encoding(n, encoding)?;
    let exact = exact_bec_moment(&best_family, epsilon, s)?;
    if (exact.moment - moment).abs() > 1e-9 * exact.moment.max(1.0) {
        return Err(Error::Inconsistent(format!(
            "search evaluator disagrees with reference: {moment} vs {}",
            exact.moment
        )));
    }
    let base = k_sum(0, 1u64 << n, s)?.value;
    let nchars = (bits as usize + 3) / 4;
    let best_function_hex = format!("{encoding:0width$x}", width = nchars);
    let report = SearchOutcome {
        n,
        s: s.value(),
        channel,
        best_function_hex,
        moment,
        ratio: moment / base,
        candidates_evaluated: evaluated,
        wall_time: clock.elapsed().as_secs_f64(),
    };

    let orbit = gdic_orbit_encodings(n)?;
    let gdic_best = orbit
        .iter()
        .map(|&e| eval_bec_encoding(n, &pattern_prob, &offs, s, e))
        .fold(f64::INFINITY, f64::min);
    let gdic_gap = gdic_best - moment;
    let gdic_attains = gdic_gap <= 1e-12 * moment.max(1.0);
    let minimizers = if n <= 2 {
        let mut hits = Vec::new();
        for enc in 0..total {
            let v = eval_bec_encoding(n, &pattern_prob, &offs, s, enc);
            if v <= moment * (1.0 + 1e-12) {
                hits.push(enc);
            }
        }
        Some(hits)
    } else {
        None
    };
    Ok(BecSearch {
        best: best_family,
        exact,
        report,
        gdic_attains,
        gdic_gap,
        minimizers,
    })
}
