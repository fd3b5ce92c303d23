//! Maximum-likelihood sequence detection on trellises.
//!
//! The [`Trellis`] is the shared substrate. Convolutional codes
//! ([`convcode`]), intersymbol-interference channels ([`isi`]) and
//! table-built machines all produce one, and every detector in the crate runs
//! on it: the block and streaming Viterbi decoders ([`viterbi`], [`stream`]),
//! BCJR, min-sum and SOVA ([`fb`]). Hidden Markov models get their own
//! log-domain engine in [`hmm`]; [`sim`] holds the Monte Carlo harness.

pub mod cli;
pub mod config;
pub mod convcode;
pub mod error;
pub mod fb;
pub mod hmm;
pub mod isi;
pub mod metric;
pub mod sim;
pub mod stream;
pub mod trellis;
pub mod viterbi;

pub use convcode::{ConvCode, FreeDistance, Termination};
pub use error::{Error, Result};
pub use fb::{bcjr, min_sum, sova, BcjrOptions, GaussianLikelihood, PosteriorTable, SoftDecision};
pub use hmm::{hmm_forward_backward, hmm_viterbi, viterbi_training_step, HmmModel};
pub use isi::{mlse_detect, ternary_threshold_detect, IsiChannel, MlseOutput};
pub use metric::{LevelMap, MetricSpec, NllTable};
pub use stream::{stream_decode, StreamDecoder};
pub use trellis::{enumerate_paths, trellis_from_table, Branch, PathRecord, Trellis};
pub use viterbi::{viterbi_decode_block, DecodeResult, EndRule};
