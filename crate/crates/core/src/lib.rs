//! Guessing moments under a one-bit helper.
//!
//! A guesser asks "is X = x?" questions, one outcome at a time, until it hits
//! the realized value. The cost of a strategy is the s-th moment of the number
//! of guesses, `G_s(X) = E[rank(X)^s]`, minimized by guessing outcomes in
//! decreasing order of probability. This crate quantifies how much a single
//! bit of side information `f(Y^n)` can shrink that cost when `Y^n` is a noisy
//! observation of a uniform binary string `X^n`:
//!
//! * [`moments`] — distributions, guess orders, moments, and the rank-power
//!   averages `K_s(a, b)` that describe uniform blocks;
//! * [`boolfn`] — truth tables, Fourier/Walsh coefficients, and functions
//!   defined per erasure pattern;
//! * [`channels`] — binary symmetric / erasure channels, channel reversal,
//!   and noisy-function means;
//! * [`exact`] — exact finite-n helper moments and exhaustive searches over
//!   helper functions;
//! * [`bounds`] — asymptotic upper and lower bounds on the guessing
//!   efficiency (the limiting ratio of helped to unhelped moments);
//! * [`analysis`] — bound curves, convergence studies, majorization
//!   comparisons, and self-checks.
//!
//! Conventions used throughout: outcomes of an n-bit string are indexed by
//! integers `0..2^n` with coordinate `i` (1-based) stored in bit `i - 1`, so
//! coordinate 1 is the least significant bit. Guess ranks are 1-based. Truth
//! tables store 0/1 values; Fourier analysis maps a bit `v` to the sign
//! `1 - 2v`.

pub mod analysis;
pub mod boolfn;
pub mod bounds;
pub mod channels;
pub mod exact;
pub mod moments;
mod numeric;

pub use boolfn::{ErasureFunctionFamily, TruthTable};
pub use moments::{FiniteDistribution, GuessOrder, KSum, MomentOrder};

/// Absolute tolerance for probability normalization checks.
pub const PROB_TOL: f64 = 1e-12;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty distribution")]
    Empty,
    #[error("entry {index} is {value}, expected a finite probability >= 0")]
    BadProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum:e}, expected 1 within {tol:e}")]
    NotNormalized { sum: f64, tol: f64 },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("moment order must be a finite real > 0, got {0}")]
    BadMomentOrder(f64),
    #[error("rank range ({a}, {b}] is empty")]
    EmptyRange { a: u64, b: u64 },
    #[error("ranks are not a bijection onto 1..=len")]
    BadOrder,
    #[error("crossover probability {0} outside [0, 1/2]")]
    BadDelta(f64),
    #[error("erasure probability {0} outside [0, 1]")]
    BadEpsilon(f64),
    #[error("{context}: n = {n} exceeds the supported limit {max}")]
    TooLarge {
        context: &'static str,
        n: u32,
        max: u32,
    },
    #[error("transition matrix row {row} sums to {sum}, expected 1")]
    BadTransitionRow { row: usize, sum: f64 },
    #[error("hex truth table: {0}")]
    HexTable(String),
    #[error("series tail not certified after {terms} terms")]
    IterationLimit { terms: u64 },
    #[error("consistency check failed: {0}")]
    Inconsistent(String),
    #[error("interrupted")]
    Interrupted,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{0}")]
    Domain(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
