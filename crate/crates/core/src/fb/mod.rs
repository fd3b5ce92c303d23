//! Forward-backward relatives of the Viterbi algorithm.
//!
//! [`bcjr`] is sum-product on the trellis and yields exact posteriors;
//! [`min_sum`] is its min-sum counterpart, which finds the same path the
//! Viterbi algorithm does; [`sova`] augments Viterbi decisions with
//! reliabilities taken from competing merges.

mod bcjr;
mod min_sum;
mod sova;

pub use bcjr::{bcjr, BcjrOptions, BranchLikelihood, GaussianLikelihood, PosteriorTable, DEFAULT_LOG_FLOOR};
pub use min_sum::{min_sum, min_sum_detailed, MinSumOutput};
pub use sova::{sova, SoftDecision};

/// `ln(e^a + e^b)` with `-inf` handled.
#[inline]
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
