//! Memoryless channels at the per-letter level, channel reversal, and the
//! channel-smoothed view of a Boolean function.

use crate::boolfn::{self, ErasureFunctionFamily, TruthTable};
use crate::moments::FiniteDistribution;
use crate::numeric::{self, Acc};
use crate::{Error, Result, PROB_TOL};

/// Binary symmetric channel with crossover `delta` in `[0, 1/2]`; `rho` is
/// the correlation `1 - 2 delta` of input and output signs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BscSpec {
    delta: f64,
    rho: f64,
}

impl BscSpec {
    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() || !(0.0..=0.5).contains(&delta) {
            return Err(Error::BadDelta(delta));
        }
        Ok(Self {
            delta,
            rho: 1.0 - 2.0 * delta,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Binary erasure channel with erasure probability `epsilon` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BecSpec {
    epsilon: f64,
}

impl BecSpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::BadEpsilon(epsilon));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// A discrete memoryless channel: an input law and a row-stochastic
/// transition matrix `transition[x][y] = P(y | x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    transition: Vec<Vec<f64>>,
    input_law: FiniteDistribution,
    dropped_outputs: Vec<usize>,
}

impl ChannelSpec {
    pub fn new(transition: Vec<Vec<f64>>, input_law: FiniteDistribution) -> Result<Self> {
        if transition.len() != input_law.len() {
            return Err(Error::LengthMismatch(transition.len(), input_law.len()));
        }
        let ny = transition.first().map(|r| r.len()).unwrap_or(0);
        if ny == 0 {
            return Err(Error::Empty);
        }
        for (row, r) in transition.iter().enumerate() {
            if r.len() != ny {
                return Err(Error::LengthMismatch(r.len(), ny));
            }
            for &v in r {
                if !v.is_finite() || !(v >= 0.0) {
                    return Err(Error::BadProbability { index: row, value: v });
                }
            }
            let sum = numeric::sum(r);
            if (sum - 1.0).abs() > PROB_TOL {
                return Err(Error::BadTransitionRow { row, sum });
            }
        }
        Ok(Self {
            transition,
            input_law,
            dropped_outputs: Vec::new(),
        })
    }

    /// BSC with a uniform input bit; outputs ordered `(0, 1)`.
    pub fn bsc(delta: f64) -> Result<Self> {
        let spec = BscSpec::new(delta)?;
        let d = spec.delta();
        Self::new(
            vec![vec![1.0 - d, d], vec![d, 1.0 - d]],
            FiniteDistribution::uniform(2)?,
        )
    }

    /// BEC with a uniform input bit; outputs ordered `(0, erasure, 1)`.
    pub fn bec(epsilon: f64) -> Result<Self> {
        let spec = BecSpec::new(epsilon)?;
        let e = spec.epsilon();
        Self::new(
            vec![vec![1.0 - e, e, 0.0], vec![0.0, e, 1.0 - e]],
            FiniteDistribution::uniform(2)?,
        )
    }

    pub fn num_inputs(&self) -> usize {
        self.transition.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.transition[0].len()
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn input_law(&self) -> &FiniteDistribution {
        &self.input_law
    }

    /// Output indices of the original channel that were removed by
    /// [`reverse_channel`] because they had probability zero.
    pub fn dropped_outputs(&self) -> &[usize] {
        &self.dropped_outputs
    }

    /// The output marginal under the input law.
    pub fn output_marginal(&self) -> FiniteDistribution {
        let ny = self.num_outputs();
        let mut out = vec![0.0f64; ny];
        for (x, row) in self.transition.iter().enumerate() {
            let px = self.input_law.get(x);
            for (y, &v) in row.iter().enumerate() {
                out[y] += px * v;
            }
        }
        FiniteDistribution::from_weights(out).expect("marginal of a valid channel")
    }
}

/// Bayes reversal: returns the channel from outputs back to inputs, with the
/// output marginal as its input law. Outputs of probability zero cannot be
/// conditioned on; they are dropped and recorded in
/// [`ChannelSpec::dropped_outputs`] of the result.
pub fn reverse_channel(ch: &ChannelSpec) -> Result<ChannelSpec> {
    let marginal = ch.output_marginal();
    let kept: Vec<usize> = (0..ch.num_outputs())
        .filter(|&y| marginal.get(y) > 0.0)
        .collect();
    let dropped: Vec<usize> = (0..ch.num_outputs())
        .filter(|&y| marginal.get(y) == 0.0)
        .collect();
    if kept.is_empty() {
        return Err(Error::Domain("channel has no reachable outputs"));
    }
    let mut transition = Vec::with_capacity(kept.len());
    let mut law = Vec::with_capacity(kept.len());
    for &y in &kept {
        let py = marginal.get(y);
        law.push(py);
        let row: Vec<f64> = (0..ch.num_inputs())
            .map(|x| ch.input_law().get(x) * ch.transition()[x][y] / py)
            .collect();
        transition.push(row);
    }
    let mut rev = ChannelSpec::new(transition, FiniteDistribution::from_weights(law)?)?;
    rev.dropped_outputs = dropped;
    Ok(rev)
}

/// The BSC noise operator applied to a truth table: entry `x` is
/// `E[sign f(Y^n) | X^n = x]` where each coordinate of `x` is flipped with
/// probability `(1 - rho) / 2`. Computed by scaling the Fourier coefficient
/// at mask `S` by `rho^|S|`.
pub fn bsc_noisy_truthtable_mean(f: &TruthTable, rho: f64) -> Result<Vec<f64>> {
    if !rho.is_finite() || !(-1.0..=1.0).contains(&rho) {
        return Err(Error::Domain("correlation must lie in [-1, 1]"));
    }
    let n = f.n();
    let mut coeffs = boolfn::fourier_transform(f);
    let mut pow = vec![1.0f64; n as usize + 1];
    for i in 1..=n as usize {
        pow[i] = pow[i - 1] * rho;
    }
    for (mask, c) in coeffs.iter_mut().enumerate() {
        *c *= pow[mask.count_ones() as usize];
    }
    boolfn::fourier_inverse(&coeffs)
}

/// Largest `n` for which the pattern-by-pattern BEC posterior is computed.
pub const MAX_BEC_POSTERIOR_N: u32 = 16;

/// Joint weights `w_b[x] = 2^n P(X^n = x, f = b)` for a pattern-indexed
/// family over the n-fold BEC: `w_1[x] = sum_S P(S) E[f_S(x_S)]` with
/// `P(S) = (1-eps)^|S| eps^(n-|S|)`, and `w_0 = 1 - w_1`.
pub(crate) fn bec_joint_weights(
    fam: &ErasureFunctionFamily,
    eps: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = fam.n();
    if n > MAX_BEC_POSTERIOR_N {
        return Err(Error::TooLarge {
            context: "bec posterior",
            n,
            max: MAX_BEC_POSTERIOR_N,
        });
    }
    BecSpec::new(eps)?;
    let m = 1usize << n;
    let mut pattern_prob = vec![0.0f64; m];
    for (mask, p) in pattern_prob.iter_mut().enumerate() {
        let k = mask.count_ones();
        *p = (1.0 - eps).powi(k as i32) * eps.powi((n - k) as i32);
    }
    let mut w1 = vec![0.0f64; m];
    for (x, w) in w1.iter_mut().enumerate() {
        let mut acc = Acc::new();
        for (mask, &p) in pattern_prob.iter().enumerate() {
            if p > 0.0 {
                acc.add(p * fam.output_mean(mask as u64, x as u64));
            }
        }
        *w = acc.total().clamp(0.0, 1.0);
    }
    let w0 = w1.iter().map(|&v| 1.0 - v).collect();
    Ok((w1, w0))
}

/// Posterior of `X^n` given that the family output equals `helper_bit`, and
/// the probability of that helper value. Fails if the helper value has
/// probability zero.
pub fn bec_posterior(
    fam: &ErasureFunctionFamily,
    eps: f64,
    helper_bit: bool,
) -> Result<(FiniteDistribution, f64)> {
    let (w1, w0) = bec_joint_weights(fam, eps)?;
    let w = if helper_bit { w1 } else { w0 };
    let mass = numeric::sum(&w) / w.len() as f64;
    if mass <= 0.0 {
        return Err(Error::Domain("helper value has probability zero"));
    }
    Ok((FiniteDistribution::from_weights(w)?, mass))
}

pub(crate) use bec_joint_weights as bec_joint_weights_internal;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::EmptyPattern;

    #[test]
    fn spec_validation() {
        assert!(BscSpec::new(0.6).is_err());
        assert!(BscSpec::new(-0.1).is_err());
        assert!((BscSpec::new(0.1).unwrap().rho() - 0.8).abs() < 1e-15);
        assert!(BecSpec::new(1.1).is_err());
        assert!(ChannelSpec::new(
            vec![vec![0.5, 0.4]],
            FiniteDistribution::uniform(1).unwrap()
        )
        .is_err());
    }

    #[test]
    fn reverse_bsc_is_bsc() {
        let ch = ChannelSpec::bsc(0.1).unwrap();
        let rev = reverse_channel(&ch).unwrap();
        assert_eq!(rev.num_inputs(), 2);
        assert_eq!(rev.num_outputs(), 2);
        assert!(rev.dropped_outputs().is_empty());
        for y in 0..2 {
            assert!((rev.input_law().get(y) - 0.5).abs() < 1e-12);
            for x in 0..2 {
                let expect = if x == y { 0.9 } else { 0.1 };
                assert!((rev.transition()[y][x] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reverse_bec_law_and_rows() {
        let ch = ChannelSpec::bec(0.3).unwrap();
        let rev = reverse_channel(&ch).unwrap();
        assert_eq!(rev.num_inputs(), 3);
        let law = rev.input_law();
        assert!((law.get(0) - 0.35).abs() < 1e-12);
        assert!((law.get(1) - 0.3).abs() < 1e-12);
        assert!((law.get(2) - 0.35).abs() < 1e-12);
        // non-erased outputs identify the input; erasure stays uniform
        assert!((rev.transition()[0][0] - 1.0).abs() < 1e-12);
        assert!((rev.transition()[2][1] - 1.0).abs() < 1e-12);
        assert!((rev.transition()[1][0] - 0.5).abs() < 1e-12);
        assert!((rev.transition()[1][1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn reverse_bec_zero_erasure_drops_the_erasure_output() {
        let ch = ChannelSpec::bec(0.0).unwrap();
        let rev = reverse_channel(&ch).unwrap();
        assert_eq!(rev.num_inputs(), 2);
        assert_eq!(rev.dropped_outputs(), &[1]);
        for y in 0..2 {
            for x in 0..2 {
                let expect = if x == y { 1.0 } else { 0.0 };
                assert!((rev.transition()[y][x] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn noisy_mean_of_dictator_and_constants() {
        let d = crate::boolfn::dictator(3).unwrap();
        let t = bsc_noisy_truthtable_mean(&d, 0.8).unwrap();
        for x in 0..8u64 {
            let sign = if x & 1 == 1 { -1.0 } else { 1.0 };
            assert!((t[x as usize] - 0.8 * sign).abs() < 1e-14);
        }
        let ones = TruthTable::new_zero(2).unwrap().complement();
        let t = bsc_noisy_truthtable_mean(&ones, 0.35).unwrap();
        for v in t {
            assert!((v + 1.0).abs() < 1e-14);
        }
        // rho = 1 leaves the table untouched
        let f = TruthTable::from_hex(3, "b4").unwrap();
        let t = bsc_noisy_truthtable_mean(&f, 1.0).unwrap();
        for x in 0..8u64 {
            assert_eq!(t[x as usize], if f.get(x) { -1.0 } else { 1.0 });
        }
    }

    #[test]
    fn noisy_mean_stays_in_range() {
        let f = TruthTable::from_hex(4, "93c5").unwrap();
        for rho in [0.0, 0.2, 0.55, 0.9] {
            for v in bsc_noisy_truthtable_mean(&f, rho).unwrap() {
                assert!(v.abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn gdic_posterior_single_bit() {
        // n = 1: P(x = 0 | helper 0) = 1 - eps/2.
        let fam = ErasureFunctionFamily::gdic(1).unwrap();
        for eps in [0.0, 0.3, 0.7, 1.0] {
            let (post, mass) = bec_posterior(&fam, eps, false).unwrap();
            assert!((mass - 0.5).abs() < 1e-12, "eps={eps}");
            assert!((post.get(0) - (1.0 - eps / 2.0)).abs() < 1e-12);
            assert!((post.get(1) - eps / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gdic_posterior_matches_geometric_form() {
        // P(x | helper 0) = 2^-(n-1) [ sum_i (1-eps) eps^(i-1) I(x_i = 0)
        //                              + eps^n / 2 ]
        let n = 4u32;
        let eps = 0.35f64;
        let fam = ErasureFunctionFamily::gdic(n).unwrap();
        let (post, mass) = bec_posterior(&fam, eps, false).unwrap();
        assert!((mass - 0.5).abs() < 1e-12);
        let scale = 1.0 / (1u64 << (n - 1)) as f64;
        for x in 0..(1u64 << n) {
            let mut v = eps.powi(n as i32) / 2.0;
            for i in 0..n {
                if x >> i & 1 == 0 {
                    v += (1.0 - eps) * eps.powi(i as i32);
                }
            }
            assert!(
                (post.get(x as usize) - scale * v).abs() < 1e-13,
                "x={x}"
            );
        }
    }

    #[test]
    fn constant_family_has_one_sided_helper() {
        // family that ignores the pattern and outputs 1 deterministically
        let n = 2u32;
        let fam = ErasureFunctionFamily::from_rule(n, EmptyPattern::Fixed(true), |mask| {
            Ok(TruthTable::new_zero(mask.count_ones())
                .unwrap()
                .complement())
        })
        .unwrap();
        let (post, mass) = bec_posterior(&fam, 0.4, true).unwrap();
        assert!((mass - 1.0).abs() < 1e-12);
        for x in 0..4 {
            assert!((post.get(x) - 0.25).abs() < 1e-12);
        }
        assert!(bec_posterior(&fam, 0.4, false).is_err());
    }
}
