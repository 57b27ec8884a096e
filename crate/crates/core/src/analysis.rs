//! Experiment drivers: figure data, convergence studies, verification
//! suites, and majorization comparisons. Everything here is deterministic —
//! same inputs, byte-identical outputs.

use serde::{Deserialize, Serialize};

use crate::boolfn::{gdic_order, projected_order, ErasureFunctionFamily};
use crate::bounds::{
    dictator_bound, fourier_bound, gdic_bound, majority_bound, maxent_bound,
    maxent_bound_improved, sdpi_maxent_bound, BoundValue,
};
use crate::channels::{bec_joint_weights_internal, bec_posterior, ChannelSpec};
use crate::exact::{
    bsc_minimum_set, exact_bec_moment, majority_moment_by_weight, r_n,
};
use crate::moments::{k_sum, FiniteDistribution, GuessOrder, MomentOrder};
use crate::numeric::Acc;
use crate::{Error, Result};

/// What a curve's values mean relative to the true efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Upper,
    Lower,
    Exact,
}

impl CurveKind {
    fn as_str(self) -> &'static str {
        match self {
            CurveKind::Upper => "upper",
            CurveKind::Lower => "lower",
            CurveKind::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub param: f64,
    pub value: f64,
    pub flags: Vec<String>,
}

/// One labeled curve of a figure; points ordered by strictly increasing
/// parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub label: String,
    pub kind: CurveKind,
    pub points: Vec<CurvePoint>,
}

/// `delta` from 0 to 1/2 in steps of 0.01.
pub fn default_delta_grid() -> Vec<f64> {
    (0..=50).map(|k| k as f64 / 100.0).collect()
}

/// `epsilon` from 0 to 1 in steps of 0.02.
pub fn default_epsilon_grid() -> Vec<f64> {
    (0..=50).map(|k| k as f64 / 50.0).collect()
}

fn validate_grid(grid: &[f64], hi: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Empty);
    }
    for pair in grid.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::BadOrder);
        }
    }
    if !(grid[0] >= 0.0) || !(grid[grid.len() - 1] <= hi) {
        return Err(Error::Domain("grid outside the parameter range"));
    }
    Ok(())
}

fn curve_from_bounds(
    label: &str,
    kind: CurveKind,
    grid: &[f64],
    mut eval: impl FnMut(f64) -> Result<BoundValue>,
) -> Result<BoundCurve> {
    let mut points = Vec::with_capacity(grid.len());
    for &x in grid {
        let b = eval(x)?;
        let mut flags = Vec::new();
        if b.vacuous {
            flags.push("vacuous".to_string());
        }
        if b.conditional {
            flags.push("conditional".to_string());
        }
        points.push(CurvePoint {
            param: x,
            value: b.value,
            flags,
        });
    }
    Ok(BoundCurve {
        label: label.to_string(),
        kind,
        points,
    })
}

/// Cross-curve sanity: at every parameter, the best unconditional lower
/// bound must not exceed the best upper bound. Conditional curves are
/// exempt but get an `exceeds-upper` flag where they poke above.
fn check_consistency(curves: &mut [BoundCurve]) -> Result<()> {
    if curves.is_empty() {
        return Ok(());
    }
    let npts = curves[0].points.len();
    for idx in 0..npts {
        let mut upper_min = f64::INFINITY;
        let mut lower_max = f64::NEG_INFINITY;
        for c in curves.iter() {
            let p = &c.points[idx];
            match c.kind {
                CurveKind::Upper => upper_min = upper_min.min(p.value),
                CurveKind::Lower => {
                    if !p.flags.iter().any(|f| f == "conditional") {
                        lower_max = lower_max.max(p.value);
                    }
                }
                CurveKind::Exact => {}
            }
        }
        if lower_max > upper_min + 1e-9 {
            return Err(Error::Inconsistent(format!(
                "lower bound {lower_max} exceeds upper bound {upper_min} at grid index {idx}"
            )));
        }
        for c in curves.iter_mut() {
            if c.kind == CurveKind::Lower {
                let p = &mut c.points[idx];
                if p.flags.iter().any(|f| f == "conditional") && p.value > upper_min + 1e-9 {
                    p.flags.push("exceeds-upper".to_string());
                }
            }
        }
    }
    Ok(())
}

/// All symmetric-channel curves on a `delta` grid: the four bounds, the
/// conditional improved entropy bound when asked for, and exhaustive-search
/// minima overlays for block lengths `1..=overlay_max_n` (0 for none,
/// at most 4).
pub fn generate_bsc_figure(
    s: &MomentOrder,
    delta_grid: &[f64],
    include_conditional: bool,
    overlay_max_n: u32,
) -> Result<Vec<BoundCurve>> {
    validate_grid(delta_grid, 0.5)?;
    if overlay_max_n > 4 {
        return Err(Error::TooLarge {
            context: "figure search overlay",
            n: overlay_max_n,
            max: 4,
        });
    }
    let mut curves = vec![
        curve_from_bounds("dictator", CurveKind::Upper, delta_grid, |d| {
            dictator_bound(d, s)
        })?,
        curve_from_bounds("majority", CurveKind::Upper, delta_grid, |d| {
            majority_bound(d, s)
        })?,
        curve_from_bounds("maxent", CurveKind::Lower, delta_grid, |d| {
            maxent_bound(d, s)
        })?,
        curve_from_bounds("fourier", CurveKind::Lower, delta_grid, |d| {
            fourier_bound(d, s)
        })?,
    ];
    if include_conditional {
        curves.push(curve_from_bounds(
            "maxent-improved",
            CurveKind::Lower,
            delta_grid,
            |d| maxent_bound_improved(d, s),
        )?);
    }
    for n in 1..=overlay_max_n {
        let base = k_sum(0, 1u64 << n, s)?.value;
        let mut points = Vec::with_capacity(delta_grid.len());
        for &d in delta_grid {
            let (min, _) = bsc_minimum_set(n, d, s, 1e-12)?;
            points.push(CurvePoint {
                param: d,
                value: min / base,
                flags: Vec::new(),
            });
        }
        curves.push(BoundCurve {
            label: format!("search-min-n{n}"),
            kind: CurveKind::Exact,
            points,
        });
    }
    check_consistency(&mut curves)?;
    Ok(curves)
}

/// Erasure-channel curves on an `epsilon` grid: the greedy-dictator upper
/// bound and the contraction-based entropy lower bound. `s = 1` only — the
/// upper bound is an average-guessing-time statement.
pub fn generate_bec_figure(s: &MomentOrder, epsilon_grid: &[f64]) -> Result<Vec<BoundCurve>> {
    validate_grid(epsilon_grid, 1.0)?;
    if s.value() != 1.0 {
        return Err(Error::Domain("erasure figure is defined for s = 1"));
    }
    let mut curves = vec![
        curve_from_bounds("gdic", CurveKind::Upper, epsilon_grid, gdic_bound)?,
        curve_from_bounds("sdpi-maxent", CurveKind::Lower, epsilon_grid, |e| {
            let ch = ChannelSpec::bec(e)?;
            let (mut bound, _) = sdpi_maxent_bound(&ch, s, 1)?;
            bound.param = e;
            Ok(bound)
        })?,
    ];
    check_consistency(&mut curves)?;
    Ok(curves)
}

/// Renders curves in the figure CSV schema:
/// `param,value,kind,label,flags`, floats with 17 significant digits, flags
/// `;`-joined.
pub fn curves_to_csv(curves: &[BoundCurve]) -> String {
    let mut out = String::from("param,value,kind,label,flags\n");
    for c in curves {
        for p in &c.points {
            out.push_str(&format!(
                "{:.16e},{:.16e},{},{},{}\n",
                p.param,
                p.value,
                c.kind.as_str(),
                c.label,
                p.flags.join(";")
            ));
        }
    }
    out
}

/// Exact helped-to-unhelped ratios of the majority vote at odd block
/// lengths, with the Gaussian-limit value they approach.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub s: f64,
    pub delta: f64,
    pub rows: Vec<(u32, f64)>,
    pub limit: f64,
}

pub fn majority_convergence(
    s: &MomentOrder,
    delta: f64,
    n_list: &[u32],
) -> Result<ConvergenceTable> {
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let r = majority_moment_by_weight(n, delta, s)?;
        rows.push((n, r.ratio));
    }
    Ok(ConvergenceTable {
        s: s.value(),
        delta,
        rows,
        limit: majority_bound(delta, s)?.value,
    })
}

/// Direction of the majorization partial order between two distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MajorizationOutcome {
    /// Strictly finer: left's sorted partial sums dominate.
    LeftMajorizes,
    RightMajorizes,
    /// Identical as multisets of masses.
    Equal,
    Incomparable,
}

/// Compares sorted-descending prefix sums with tolerance 1e-12. Shorter
/// distributions are padded with zero mass.
pub fn majorization_compare(
    p: &FiniteDistribution,
    q: &FiniteDistribution,
) -> MajorizationOutcome {
    let m = p.len().max(q.len());
    let sorted = |d: &FiniteDistribution| {
        let mut v = d.probs().to_vec();
        v.resize(m, 0.0);
        v.sort_unstable_by(|a, b| b.total_cmp(a));
        v
    };
    let a = sorted(p);
    let b = sorted(q);
    let mut left_ge = true;
    let mut right_ge = true;
    let mut pa = Acc::new();
    let mut pb = Acc::new();
    for i in 0..m {
        pa.add(a[i]);
        pb.add(b[i]);
        let d = pa.total() - pb.total();
        if d < -1e-12 {
            left_ge = false;
        }
        if d > 1e-12 {
            right_ge = false;
        }
    }
    match (left_ge, right_ge) {
        (true, true) => MajorizationOutcome::Equal,
        (true, false) => MajorizationOutcome::LeftMajorizes,
        (false, true) => MajorizationOutcome::RightMajorizes,
        (false, false) => MajorizationOutcome::Incomparable,
    }
}

/// Zero-noise and half-noise structure of the exhaustive minimum, plus
/// monotonicity of the minimum in the crossover probability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prop1Report {
    pub n: u32,
    pub s: f64,
    /// Minimum moment at `delta = 0` and how many functions attain it.
    pub zero_noise_min: f64,
    pub zero_noise_minimizers: u64,
    /// Number of balanced functions on `n` bits.
    pub balanced_count: u64,
    /// Minimizers at zero noise are exactly the balanced functions, at the
    /// half-space moment.
    pub zero_noise_ok: bool,
    /// At `delta = 1/2` every function's ratio is 1.
    pub half_noise_ties: bool,
    /// The minimum is non-decreasing along the `delta` grid.
    pub monotone_in_delta: bool,
    pub grid: Vec<f64>,
    pub minima: Vec<f64>,
}

impl Prop1Report {
    pub fn passed(&self) -> bool {
        self.zero_noise_ok && self.half_noise_ties && self.monotone_in_delta
    }
}

pub fn verify_prop1(n: u32, s: &MomentOrder) -> Result<Prop1Report> {
    if n == 0 || n > 4 {
        return Err(Error::TooLarge {
            context: "prop1 verification",
            n,
            max: 4,
        });
    }
    let m = 1u64 << n;
    let (min0, hits0) = bsc_minimum_set(n, 0.0, s, 1e-12)?;
    let half_moment = k_sum(0, m / 2, s)?.value;
    let all_balanced = hits0.iter().all(|&enc| {
        let weight: u32 = (0..m).map(|x| (enc >> x & 1) as u32).sum();
        u64::from(weight) == m / 2
    });
    let balanced_count = {
        // C(2^n, 2^(n-1))
        let mut c = 1u128;
        for i in 0..m / 2 {
            c = c * (m as u128 - i as u128) / (i as u128 + 1);
        }
        c as u64
    };
    let zero_noise_ok = (min0 - half_moment).abs() <= 1e-12 * half_moment
        && all_balanced
        && hits0.len() as u64 == balanced_count;

    let full_moment = k_sum(0, m, s)?.value;
    let (min_half, hits_half) = bsc_minimum_set(n, 0.5, s, 1e-12)?;
    let half_noise_ties = hits_half.len() as u64 == 1u64 << m
        && (min_half - full_moment).abs() <= 1e-12 * full_moment;

    let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.05).collect();
    let mut minima = Vec::with_capacity(grid.len());
    for &d in &grid {
        minima.push(bsc_minimum_set(n, d, s, 1e-12)?.0);
    }
    let monotone_in_delta = minima.windows(2).all(|w| w[1] + 1e-12 * w[1] >= w[0]);

    Ok(Prop1Report {
        n,
        s: s.value(),
        zero_noise_min: min0,
        zero_noise_minimizers: hits0.len() as u64,
        balanced_count,
        zero_noise_ok,
        half_noise_ties,
        monotone_in_delta,
        grid,
        minima,
    })
}

/// Optimality structure of the greedy dictator's guessing orders.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prop2Report {
    pub n: u32,
    pub epsilon: f64,
    /// Guessing with the score order (lexicographic for `epsilon <= 1/2`)
    /// in both branches reproduces the optimal-order moment.
    pub score_order_optimal: bool,
    pub score_order_gap: f64,
    /// For every surviving pattern and every projected input, the greedy
    /// dictator picks the branch with the smaller projected rank mass.
    pub per_pattern_min_ok: bool,
    pub patterns_checked: u32,
}

impl Prop2Report {
    pub fn passed(&self) -> bool {
        self.score_order_optimal && self.per_pattern_min_ok
    }
}

/// Moment of a family when each helper branch guesses in a fixed order
/// instead of the posterior-optimal one.
fn bec_moment_with_orders(
    fam: &ErasureFunctionFamily,
    epsilon: f64,
    s: &MomentOrder,
    ord0: &GuessOrder,
    ord1: &GuessOrder,
) -> Result<f64> {
    let (w1, w0) = bec_joint_weights_internal(fam, epsilon)?;
    let m = w1.len();
    if ord0.len() != m || ord1.len() != m {
        return Err(Error::LengthMismatch(ord0.len(), m));
    }
    let mut acc = Acc::new();
    for x in 0..m {
        acc.add(w0[x] * s.rank_pow(ord0.rank(x) as f64));
        acc.add(w1[x] * s.rank_pow(ord1.rank(x) as f64));
    }
    Ok(acc.total() / m as f64)
}

pub fn verify_prop2(n: u32, epsilon: f64) -> Result<Prop2Report> {
    if n == 0 || n > 5 {
        return Err(Error::TooLarge {
            context: "prop2 verification",
            n,
            max: 5,
        });
    }
    let s = MomentOrder::new(1.0)?;
    let fam = ErasureFunctionFamily::gdic(n)?;
    let optimal = exact_bec_moment(&fam, epsilon, &s)?.moment;
    let ord0 = gdic_order(n, epsilon, false)?;
    let ord1 = gdic_order(n, epsilon, true)?;
    let fixed = bec_moment_with_orders(&fam, epsilon, &s, &ord0, &ord1)?;
    let score_order_gap = fixed - optimal;
    let score_order_optimal = score_order_gap.abs() <= 1e-12 * optimal;

    let mut per_pattern_min_ok = true;
    let mut patterns_checked = 0;
    for mask in 1..(1u64 << n) {
        let p0 = projected_order(&ord0, n, mask)?;
        let p1 = projected_order(&ord1, n, mask)?;
        for c in 0..p0.len() {
            let picked = if c & 1 == 1 { p1[c] } else { p0[c] };
            if picked != p0[c].min(p1[c]) {
                per_pattern_min_ok = false;
            }
        }
        patterns_checked += 1;
    }

    Ok(Prop2Report {
        n,
        epsilon,
        score_order_optimal,
        score_order_gap,
        per_pattern_min_ok,
        patterns_checked,
    })
}

/// The guessing-time and majorization comparison between the greedy
/// dictator and the per-pattern majority family at one erasure rate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MajorizationCase {
    pub n: u32,
    pub epsilon: f64,
    pub gdic_moment: f64,
    pub majority_moment: f64,
    /// Greedy dictator's average guessing time is strictly lower.
    pub gdic_strictly_lower: bool,
    /// Majorization outcome of the helper-bit posteriors, for bits 0 and 1.
    pub posterior_outcomes: [MajorizationOutcome; 2],
    /// Some posterior pair is incomparable, so the moment ordering is not
    /// explained by majorization.
    pub incomparable: bool,
}

pub fn bec_majorization_case(n: u32, epsilon: f64) -> Result<MajorizationCase> {
    let s = MomentOrder::new(1.0)?;
    let gdic = ErasureFunctionFamily::gdic(n)?;
    let maj = ErasureFunctionFamily::majority_family(n)?;
    let gdic_moment = exact_bec_moment(&gdic, epsilon, &s)?.moment;
    let majority_moment = exact_bec_moment(&maj, epsilon, &s)?.moment;
    let mut outcomes = [MajorizationOutcome::Equal; 2];
    for (slot, bit) in [false, true].into_iter().enumerate() {
        let (pg, _) = bec_posterior(&gdic, epsilon, bit)?;
        let (pm, _) = bec_posterior(&maj, epsilon, bit)?;
        outcomes[slot] = majorization_compare(&pg, &pm);
    }
    let incomparable = outcomes
        .iter()
        .any(|o| *o == MajorizationOutcome::Incomparable);
    Ok(MajorizationCase {
        n,
        epsilon,
        gdic_moment,
        majority_moment,
        gdic_strictly_lower: gdic_moment < majority_moment,
        posterior_outcomes: outcomes,
        incomparable,
    })
}

/// `r_n(w)` is non-decreasing in the input weight `w` for every crossover
/// probability up to 1/2; returns the first violation if any.
pub fn check_r_n_monotone(n_max: u32, deltas: &[f64]) -> Result<Option<(u32, u32, f64)>> {
    for n in 1..=n_max {
        for &d in deltas {
            let mut prev = r_n(n, 0, d)?;
            for w in 1..=n {
                let cur = r_n(n, w, d)?;
                if cur + 1e-12 < prev {
                    return Ok(Some((n, w, d)));
                }
                prev = cur;
            }
        }
    }
    Ok(None)
}
