//! Boolean functions on n-bit strings, their Fourier expansions, and
//! families of functions indexed by erasure patterns.
//!
//! An input `x` is an integer in `0..2^n`; coordinate `i` (1-based) is bit
//! `i - 1`, so coordinate 1 is the least significant bit. Truth tables store
//! 0/1 values. Fourier analysis uses the sign encoding `1 - 2v` for both
//! inputs and outputs, under which the coefficient at subset mask `S` is
//! `E[f(x) * prod_{i in S} sign(x_i)]` for uniform `x`.

use crate::moments::GuessOrder;
use crate::{Error, Result};

/// Largest string length a materialized truth table supports (the table has
/// `2^n` entries).
pub const MAX_TABLE_N: u32 = 24;

/// A Boolean function on `{0,1}^n`, stored as a packed bit table indexed by
/// the integer encoding of the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    n: u32,
    bits: Vec<u64>,
}

fn check_table_n(n: u32) -> Result<()> {
    if n > MAX_TABLE_N {
        return Err(Error::TooLarge {
            context: "truth table",
            n,
            max: MAX_TABLE_N,
        });
    }
    Ok(())
}

impl TruthTable {
    /// The all-zero function.
    pub fn new_zero(n: u32) -> Result<Self> {
        check_table_n(n)?;
        let words = ((1usize << n) + 63) / 64;
        Ok(Self {
            n,
            bits: vec![0; words],
        })
    }

    /// Builds a table by evaluating `f` on every input.
    pub fn from_fn<F: FnMut(u64) -> bool>(n: u32, mut f: F) -> Result<Self> {
        let mut t = Self::new_zero(n)?;
        for x in 0..(1u64 << n) {
            if f(x) {
                t.set(x, true);
            }
        }
        Ok(t)
    }

    pub fn from_bits(n: u32, values: &[bool]) -> Result<Self> {
        check_table_n(n)?;
        if values.len() != 1usize << n {
            return Err(Error::LengthMismatch(values.len(), 1usize << n));
        }
        Self::from_fn(n, |x| values[x as usize])
    }

    /// Parses the hex form produced by [`TruthTable::to_hex`]: the table read
    /// as a big integer whose bit `x` is `f(x)`, written MSB-first in
    /// lowercase hex. For `2^n < 4` the single digit must fit in `2^n` bits.
    pub fn from_hex(n: u32, hex: &str) -> Result<Self> {
        check_table_n(n)?;
        let len = 1usize << n;
        let nchars = usize::max(1, len / 4);
        if hex.len() != nchars {
            return Err(Error::HexTable(format!(
                "expected {nchars} hex digits for n = {n}, got {}",
                hex.len()
            )));
        }
        let mut t = Self::new_zero(n)?;
        for (pos, c) in hex.chars().rev().enumerate() {
            let nib = c
                .to_digit(16)
                .ok_or_else(|| Error::HexTable(format!("invalid digit {c:?}")))? as u64;
            if 4 * pos >= len && nib != 0 {
                return Err(Error::HexTable("digit out of range for table".into()));
            }
            for b in 0..4u64 {
                let x = 4 * pos as u64 + b;
                if nib >> b & 1 == 1 {
                    if x >= len as u64 {
                        return Err(Error::HexTable("digit out of range for table".into()));
                    }
                    t.set(x, true);
                }
            }
        }
        Ok(t)
    }

    /// Hex form: the table as a big integer with bit `x` equal to `f(x)`,
    /// MSB-first, `max(1, 2^n/4)` lowercase digits.
    pub fn to_hex(&self) -> String {
        let len = 1usize << self.n;
        let nchars = usize::max(1, len / 4);
        let mut out = String::with_capacity(nchars);
        for pos in (0..nchars).rev() {
            let mut nib = 0u64;
            for b in 0..4u64 {
                let x = 4 * pos as u64 + b;
                if x < len as u64 && self.get(x) {
                    nib |= 1 << b;
                }
            }
            out.push(char::from_digit(nib as u32, 16).unwrap());
        }
        out
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of table entries, `2^n`.
    pub fn len(&self) -> u64 {
        1u64 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, x: u64) -> bool {
        self.bits[(x >> 6) as usize] >> (x & 63) & 1 == 1
    }

    pub fn set(&mut self, x: u64, v: bool) {
        let word = &mut self.bits[(x >> 6) as usize];
        if v {
            *word |= 1 << (x & 63);
        } else {
            *word &= !(1 << (x & 63));
        }
    }

    /// Number of inputs mapped to 1.
    pub fn weight(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_balanced(&self) -> bool {
        2 * self.weight() == self.len()
    }

    /// The pointwise complement `1 - f`.
    pub fn complement(&self) -> Self {
        let mut t = self.clone();
        for w in t.bits.iter_mut() {
            *w = !*w;
        }
        // clear padding beyond 2^n
        let len = 1u64 << self.n;
        let tail = (len & 63) as u32;
        if tail != 0 {
            let last = t.bits.len() - 1;
            t.bits[last] &= (1u64 << tail) - 1;
        }
        t
    }

    /// Relabels coordinates: the result `g` satisfies
    /// `g(x) = f(y)` where bit `j` of `y` is bit `perm[j]` of `x`.
    pub fn permute_coords(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n as usize;
        if perm.len() != n {
            return Err(Error::LengthMismatch(perm.len(), n));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::Domain("coordinate permutation is not a bijection"));
            }
            seen[p] = true;
        }
        TruthTable::from_fn(self.n, |x| {
            let mut y = 0u64;
            for (j, &p) in perm.iter().enumerate() {
                y |= (x >> p & 1) << j;
            }
            self.get(y)
        })
    }
}

/// `f(x) = x_1`, the first coordinate.
pub fn dictator(n: u32) -> Result<TruthTable> {
    if n == 0 {
        return Err(Error::Domain("dictator needs n >= 1"));
    }
    TruthTable::from_fn(n, |x| x & 1 == 1)
}

/// `f(x) = x_1 AND ... AND x_k`.
pub fn dictator_k(n: u32, k: u32) -> Result<TruthTable> {
    if k == 0 || k > n {
        return Err(Error::Domain("dictator-k needs 1 <= k <= n"));
    }
    let mask = (1u64 << k) - 1;
    TruthTable::from_fn(n, |x| x & mask == mask)
}

/// Threshold function: 1 when the Hamming weight strictly exceeds
/// `threshold` (default `n/2`, which is the majority vote for odd n).
pub fn majority(n: u32, threshold: Option<f64>) -> Result<TruthTable> {
    if n == 0 {
        return Err(Error::Domain("majority needs n >= 1"));
    }
    let t = threshold.unwrap_or(n as f64 / 2.0);
    if !t.is_finite() {
        return Err(Error::Domain("majority threshold must be finite"));
    }
    TruthTable::from_fn(n, |x| (x.count_ones() as f64) > t)
}

/// `f(x) = x_1 XOR ... XOR x_n`.
pub fn parity(n: u32) -> Result<TruthTable> {
    if n == 0 {
        return Err(Error::Domain("parity needs n >= 1"));
    }
    TruthTable::from_fn(n, |x| x.count_ones() % 2 == 1)
}

/// In-place unnormalized Walsh-Hadamard transform; applying it twice
/// multiplies by `2^n`.
pub(crate) fn wht(v: &mut [f64]) {
    debug_assert!(v.len().is_power_of_two());
    let mut h = 1;
    while h < v.len() {
        let mut i = 0;
        while i < v.len() {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
            i += 2 * h;
        }
        h *= 2;
    }
}

/// Fourier coefficients of `f` in the sign encoding, indexed by subset mask:
/// `out[S] = 2^-n sum_x (1 - 2 f(x)) (-1)^{popcount(x & S)}`.
pub fn fourier_transform(f: &TruthTable) -> Vec<f64> {
    let len = f.len() as usize;
    let mut v: Vec<f64> = (0..len as u64)
        .map(|x| if f.get(x) { -1.0 } else { 1.0 })
        .collect();
    wht(&mut v);
    let scale = 1.0 / len as f64;
    for c in v.iter_mut() {
        *c *= scale;
    }
    v
}

/// Evaluates a Fourier expansion back to pointwise sign-encoded values.
pub fn fourier_inverse(coeffs: &[f64]) -> Result<Vec<f64>> {
    if !coeffs.len().is_power_of_two() {
        return Err(Error::Domain("coefficient vector length must be 2^n"));
    }
    let mut v = coeffs.to_vec();
    wht(&mut v);
    Ok(v)
}

/// Keeps the bits of `x` selected by `mask`, packed in ascending position
/// order (a software PEXT).
#[inline]
pub fn compress_index(x: u64, mask: u64) -> u64 {
    let mut out = 0u64;
    let mut bit = 0u32;
    let mut m = mask;
    while m != 0 {
        let p = m.trailing_zeros();
        out |= (x >> p & 1) << bit;
        bit += 1;
        m &= m - 1;
    }
    out
}

/// What a pattern-indexed family does when every coordinate is erased.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmptyPattern {
    /// Output the fixed bit.
    Fixed(bool),
    /// Output an independent fair coin.
    FairCoin,
}

/// One Boolean function per erasure pattern: for each set `S` of surviving
/// coordinates (a bitmask), a truth table on the `|S|` survivors, indexed by
/// the compressed input [`compress_index`]`(x, S)`. The all-erased pattern is
/// governed by [`EmptyPattern`].
#[derive(Debug, Clone, PartialEq)]
pub struct ErasureFunctionFamily {
    n: u32,
    empty: EmptyPattern,
    tables: Vec<TruthTable>,
}

impl ErasureFunctionFamily {
    /// `tables[mask]` must be on `popcount(mask)` bits for every nonzero
    /// mask; `tables[0]` must be a 0-bit table and is ignored in favor of
    /// `empty`.
    pub fn new(n: u32, empty: EmptyPattern, tables: Vec<TruthTable>) -> Result<Self> {
        if n == 0 || n > MAX_TABLE_N {
            return Err(Error::TooLarge {
                context: "erasure family",
                n,
                max: MAX_TABLE_N,
            });
        }
        if tables.len() != 1usize << n {
            return Err(Error::LengthMismatch(tables.len(), 1usize << n));
        }
        for (mask, t) in tables.iter().enumerate() {
            if t.n() != mask.count_ones() {
                return Err(Error::Domain("table size does not match its pattern"));
            }
        }
        Ok(Self { n, empty, tables })
    }

    /// Builds a family from a rule giving each pattern's table.
    pub fn from_rule<F: FnMut(u64) -> Result<TruthTable>>(
        n: u32,
        empty: EmptyPattern,
        mut rule: F,
    ) -> Result<Self> {
        let mut tables = Vec::with_capacity(1usize << n);
        for mask in 0..(1u64 << n) {
            tables.push(if mask == 0 {
                TruthTable::new_zero(0)?
            } else {
                rule(mask)?
            });
        }
        Self::new(n, empty, tables)
    }

    /// Greedy dictator: on pattern `S`, output the surviving coordinate with
    /// the smallest index; on the empty pattern, a fair coin.
    pub fn gdic(n: u32) -> Result<Self> {
        Self::gdic_with_empty(n, EmptyPattern::FairCoin)
    }

    /// Greedy dictator with an explicit all-erased behavior.
    pub fn gdic_with_empty(n: u32, empty: EmptyPattern) -> Result<Self> {
        // the minimum surviving coordinate is compressed position 0
        Self::from_rule(n, empty, |mask| {
            TruthTable::from_fn(mask.count_ones(), |z| z & 1 == 1)
        })
    }

    /// Majority on every pattern: on `S`, the vote of the surviving bits with
    /// threshold `|S|/2`; fair coin when everything is erased.
    pub fn majority_family(n: u32) -> Result<Self> {
        Self::from_rule(n, EmptyPattern::FairCoin, |mask| {
            majority(mask.count_ones(), None)
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn empty_pattern(&self) -> EmptyPattern {
        self.empty
    }

    pub fn table(&self, mask: u64) -> &TruthTable {
        &self.tables[mask as usize]
    }

    /// Probability that the family outputs 1 on pattern `mask` and full
    /// input `x`: 0 or 1 for deterministic patterns, 1/2 for a fair coin on
    /// the empty pattern.
    pub fn output_mean(&self, mask: u64, x: u64) -> f64 {
        if mask == 0 {
            return match self.empty {
                EmptyPattern::Fixed(b) => b as u8 as f64,
                EmptyPattern::FairCoin => 0.5,
            };
        }
        self.tables[mask as usize].get(compress_index(x, mask)) as u8 as f64
    }
}

/// Reverses the low `n` bits of `x`.
#[inline]
pub fn bit_reverse(x: u64, n: u32) -> u64 {
    let mut out = 0u64;
    for j in 0..n {
        out |= (x >> j & 1) << (n - 1 - j);
    }
    out
}

/// Lexicographic guess order on n-bit strings read `x_1 x_2 ... x_n`:
/// `rank(x) = 1 + bit_reverse(x)`, so 00..0 is guessed first and low-index
/// coordinates matter most.
pub fn lex_order(n: u32) -> Result<GuessOrder> {
    if n == 0 || n > 25 {
        return Err(Error::TooLarge {
            context: "lex order",
            n,
            max: 25,
        });
    }
    let ranks: Vec<u32> = (0..1u64 << n)
        .map(|x| bit_reverse(x, n) as u32 + 1)
        .collect();
    GuessOrder::from_ranks(ranks)
}

/// Reverse-lexicographic order: 11..1 first.
pub fn reverse_lex_order(n: u32) -> Result<GuessOrder> {
    let m = 1u64 << n;
    let lex = lex_order(n)?;
    let ranks: Vec<u32> = (0..m as usize)
        .map(|x| (m as u32 + 1) - lex.rank(x))
        .collect();
    GuessOrder::from_ranks(ranks)
}

/// Guess order sorted by the geometric score `sum_i eps^(i-1) x_i`:
/// descending when `helper_bit` is 1 (strings that look "all ones early"
/// first), ascending when it is 0. Ties break toward the smaller integer
/// index. For `eps <= 1/2` this is (reverse-)lexicographic order; as
/// `eps -> 1` it tends to ordering by Hamming weight.
pub fn gdic_order(n: u32, eps: f64, helper_bit: bool) -> Result<GuessOrder> {
    if n == 0 || n > 25 {
        return Err(Error::TooLarge {
            context: "gdic order",
            n,
            max: 25,
        });
    }
    if !eps.is_finite() || !(0.0..=1.0).contains(&eps) {
        return Err(Error::BadEpsilon(eps));
    }
    let m = 1u64 << n;
    let mut score = vec![0.0f64; m as usize];
    let mut w = 1.0;
    for i in 0..n {
        for x in 0..m {
            if x >> i & 1 == 1 {
                score[x as usize] += w;
            }
        }
        w *= eps;
    }
    let mut idx: Vec<u32> = (0..m as u32).collect();
    idx.sort_unstable_by(|&a, &b| {
        let (sa, sb) = (score[a as usize], score[b as usize]);
        let ord = if helper_bit {
            sb.total_cmp(&sa)
        } else {
            sa.total_cmp(&sb)
        };
        ord.then(a.cmp(&b))
    });
    let mut ranks = vec![0u32; m as usize];
    for (pos, &i) in idx.iter().enumerate() {
        ranks[i as usize] = pos as u32 + 1;
    }
    GuessOrder::from_ranks(ranks)
}

/// Projects a guess order onto the pattern `mask`: entry `c` is the sum of
/// ranks of all full inputs whose compressed survivors equal `c`. These rank
/// masses decide which helper value an optimal pattern function should pick.
pub fn projected_order(order: &GuessOrder, n: u32, mask: u64) -> Result<Vec<u64>> {
    let m = 1u64 << n;
    if order.len() as u64 != m {
        return Err(Error::LengthMismatch(order.len(), m as usize));
    }
    if mask >= m {
        return Err(Error::Domain("pattern mask out of range"));
    }
    let mut out = vec![0u64; 1usize << mask.count_ones()];
    for x in 0..m {
        out[compress_index(x, mask) as usize] += order.rank(x as usize) as u64;
    }
    Ok(out)
}
