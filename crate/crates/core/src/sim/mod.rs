//! Seeded Monte Carlo harness: channels, quantizer, BER sweeps and reports.

pub mod channel;
pub mod quantize;
pub mod report;
pub mod rng;
pub mod sweep;

pub use channel::{awgn_transmit, bsc_transmit, noise_sigma, ChannelSpec};
pub use quantize::{quantize, Quantizer};
pub use report::{coding_gain, crossing, q_function, BerReport, BerRow};
pub use sweep::{run_sweep, CodedMetric, IsiDetector, NoiseKind, StopRule, SweepConfig, System};
