//! Distributions, guess orders, and guessing moments.
//!
//! The s-th guessing moment of a distribution P under a guess order `ord` is
//! `G_s = sum_x P(x) ord(x)^s` with 1-based ranks. It is minimized by
//! guessing in decreasing order of probability. The helper machinery in the
//! rest of the crate reduces to these primitives plus the rank-power average
//! `K_s(a, b) = (1/(b-a)) sum_{i=a+1}^b i^s`, which is the moment of a
//! uniform block of outcomes occupying ranks `a+1..=b`.

use crate::numeric::{self, Acc};
use crate::{Error, Result, PROB_TOL};

/// A probability vector: finitely many nonnegative entries summing to 1
/// within [`PROB_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    p: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Empty);
        }
        for (index, &value) in p.iter().enumerate() {
            if !value.is_finite() || !(value >= 0.0) {
                return Err(Error::BadProbability { index, value });
            }
        }
        let sum = numeric::sum(&p);
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::NotNormalized { sum, tol: PROB_TOL });
        }
        Ok(Self { p })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Empty);
        }
        Ok(Self {
            p: vec![1.0 / m as f64; m],
        })
    }

    /// Normalizes nonnegative weights. Weights in `[-1e-9, 0)` are treated as
    /// rounding noise and clamped to zero; anything more negative is an
    /// error, as is a nonpositive total.
    pub fn from_weights(mut w: Vec<f64>) -> Result<Self> {
        for (index, value) in w.iter_mut().enumerate() {
            if !value.is_finite() || *value < -1e-9 {
                return Err(Error::BadProbability {
                    index,
                    value: *value,
                });
            }
            if *value < 0.0 {
                *value = 0.0;
            }
        }
        let total = numeric::sum(&w);
        if !(total > 0.0) {
            return Err(Error::Domain("weights sum to zero"));
        }
        for value in w.iter_mut() {
            *value /= total;
        }
        // Renormalization can leave the sum a few ulps off 1; that is within
        // PROB_TOL, which new() enforces.
        Self::new(w)
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, i: usize) -> f64 {
        self.p[i]
    }
}

/// Moment order s > 0. Integer orders up to 64 remember their exponent so
/// rank powers go through `powi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOrder {
    s: f64,
    int_exp: Option<i32>,
}

impl MomentOrder {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::BadMomentOrder(s));
        }
        let int_exp = if s.fract() == 0.0 && s <= 64.0 {
            Some(s as i32)
        } else {
            None
        };
        Ok(Self { s, int_exp })
    }

    pub fn value(&self) -> f64 {
        self.s
    }

    /// `r^s` for a rank (or any nonnegative real) `r`.
    #[inline]
    pub fn rank_pow(&self, r: f64) -> f64 {
        match self.int_exp {
            Some(k) => r.powi(k),
            None => r.powf(self.s),
        }
    }

    /// `r^(s+1)`.
    #[inline]
    pub fn rank_pow_succ(&self, r: f64) -> f64 {
        match self.int_exp {
            Some(k) => r.powi(k + 1),
            None => r.powf(self.s + 1.0),
        }
    }
}

/// A guess order over `m` outcomes: a bijection onto ranks `1..=m`, stored as
/// the rank of each outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct GuessOrder {
    ranks: Vec<u32>,
}

impl GuessOrder {
    /// Validates that `ranks` is a bijection onto `1..=len`.
    pub fn from_ranks(ranks: Vec<u32>) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::Empty);
        }
        let m = ranks.len();
        if m > u32::MAX as usize {
            return Err(Error::TooLarge {
                context: "guess order",
                n: 32,
                max: 32,
            });
        }
        let mut seen = vec![false; m];
        for &r in &ranks {
            let r = r as usize;
            if r == 0 || r > m || seen[r - 1] {
                return Err(Error::BadOrder);
            }
            seen[r - 1] = true;
        }
        Ok(Self { ranks })
    }

    /// The order that guesses outcome 0 first, then 1, and so on.
    pub fn identity(m: usize) -> Self {
        Self {
            ranks: (1..=m as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// 1-based rank of outcome `i`.
    pub fn rank(&self, i: usize) -> u32 {
        self.ranks[i]
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    /// Outcomes listed in guessing sequence (index of the rank-1 outcome
    /// first).
    pub fn sequence(&self) -> Vec<usize> {
        let mut seq = vec![0usize; self.ranks.len()];
        for (i, &r) in self.ranks.iter().enumerate() {
            seq[r as usize - 1] = i;
        }
        seq
    }
}

/// The optimal guess order for `p`: decreasing probability, ties broken by
/// ascending outcome index.
pub fn optimal_order(p: &FiniteDistribution) -> GuessOrder {
    let probs = p.probs();
    let mut idx: Vec<u32> = (0..probs.len() as u32).collect();
    idx.sort_unstable_by(|&a, &b| {
        probs[b as usize]
            .total_cmp(&probs[a as usize])
            .then(a.cmp(&b))
    });
    let mut ranks = vec![0u32; probs.len()];
    for (pos, &i) in idx.iter().enumerate() {
        ranks[i as usize] = pos as u32 + 1;
    }
    GuessOrder { ranks }
}

/// `G_s` of `p` under the given guess order.
pub fn guessing_moment(p: &FiniteDistribution, s: &MomentOrder, order: &GuessOrder) -> Result<f64> {
    if p.len() != order.len() {
        return Err(Error::LengthMismatch(p.len(), order.len()));
    }
    let mut acc = Acc::new();
    for (i, &pi) in p.probs().iter().enumerate() {
        if pi > 0.0 {
            acc.add(pi * s.rank_pow(order.rank(i) as f64));
        }
    }
    Ok(acc.total())
}

/// `G_s` of `p` under its optimal order.
pub fn optimal_guessing_moment(p: &FiniteDistribution, s: &MomentOrder) -> f64 {
    let order = optimal_order(p);
    guessing_moment(p, s, &order).expect("order built for p")
}

/// Optimal `G_s(X | B)` for a joint law given as `joint[x][b]`: each helper
/// outcome `b` is guessed with the optimal order for its posterior, and
/// outcomes of probability zero contribute nothing.
pub fn conditional_guessing_moment(joint: &[Vec<f64>], s: &MomentOrder) -> Result<f64> {
    if joint.is_empty() || joint[0].is_empty() {
        return Err(Error::Empty);
    }
    let m = joint.len();
    let nb = joint[0].len();
    let mut total = Acc::new();
    for (x, row) in joint.iter().enumerate() {
        if row.len() != nb {
            return Err(Error::LengthMismatch(row.len(), nb));
        }
        for &v in row {
            if !v.is_finite() || !(v >= 0.0) {
                return Err(Error::BadProbability { index: x, value: v });
            }
            total.add(v);
        }
    }
    let total = total.total();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::NotNormalized {
            sum: total,
            tol: PROB_TOL,
        });
    }
    let mut moment = Acc::new();
    for b in 0..nb {
        let mut col: Vec<f64> = (0..m).map(|x| joint[x][b]).collect();
        let mass = numeric::sum(&col);
        if mass <= 0.0 {
            continue;
        }
        for v in col.iter_mut() {
            *v /= mass;
        }
        let posterior = FiniteDistribution::new(col)?;
        moment.add(mass * optimal_guessing_moment(&posterior, s));
    }
    Ok(moment.total())
}

/// Ranges up to this size are summed term by term; larger ones fall back to
/// the integral bracket.
pub const K_SUM_EXACT_MAX: u64 = 1 << 24;

/// The rank-power average `K_s(a, b)` together with an enclosure. `exact`
/// ranges report a degenerate enclosure; bracketed ranges report the integral
/// bounds with the midpoint as the value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSum {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

/// `K_s(a, b) = (1/(b-a)) sum_{i=a+1}^b i^s`. Exact (compensated) summation
/// for ranges up to [`K_SUM_EXACT_MAX`]; beyond that, the integral bracket
/// with relative width O((s+1)/a).
pub fn k_sum(a: u64, b: u64, s: &MomentOrder) -> Result<KSum> {
    if b <= a {
        return Err(Error::EmptyRange { a, b });
    }
    let width = b - a;
    if width <= K_SUM_EXACT_MAX {
        let mut acc = Acc::new();
        for i in (a + 1)..=b {
            acc.add(s.rank_pow(i as f64));
        }
        let value = acc.total() / width as f64;
        Ok(KSum {
            value,
            lower: value,
            upper: value,
            exact: true,
        })
    } else {
        let (lower, upper) = k_sum_bracket(a, b, s);
        Ok(KSum {
            value: 0.5 * (lower + upper),
            lower,
            upper,
            exact: false,
        })
    }
}

/// Integral bracket for `K_s(a, b)`:
/// `(b^(s+1) - a^(s+1)) / ((b-a)(s+1)) <= K_s(a, b) <=
///  ((b+1)^(s+1) - (a+1)^(s+1)) / ((b-a)(s+1))`.
pub fn k_sum_bracket(a: u64, b: u64, s: &MomentOrder) -> (f64, f64) {
    let lower = numeric::power_mean(a as f64, b as f64, s.value());
    let upper = numeric::power_mean(a as f64 + 1.0, b as f64 + 1.0, s.value());
    (lower, upper)
}

/// Leading-order form `(b^(s+1) - a^(s+1)) / ((b-a)(s+1))`, the common limit
/// of the bracket.
pub fn k_sum_asymptotic(a: u64, b: u64, s: &MomentOrder) -> Result<f64> {
    if b <= a {
        return Err(Error::EmptyRange { a, b });
    }
    Ok(numeric::power_mean(a as f64, b as f64, s.value()))
}

/// `sum_{i=1..2^n} (i-1)^s / sum_{i=1..2^n} i^s`: the factor by which a
/// one-rank shift can change a uniform 2^n-block moment. Tends to 1 like
/// `1 - O((s+1) 2^-n)`.
pub fn shifted_rank_power_ratio(n: u32, s: &MomentOrder) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("rank-shift ratio needs n >= 1"));
    }
    if n > 24 {
        return Err(Error::TooLarge {
            context: "rank-shift ratio",
            n,
            max: 24,
        });
    }
    let m = 1u64 << n;
    let den = m as f64 * k_sum(0, m, s)?.value;
    let num = if m == 1 {
        0.0
    } else {
        (m - 1) as f64 * k_sum(0, m - 1, s)?.value
    };
    Ok(num / den)
}
