//! Monte Carlo BER sweeps.
//!
//! Frame `f` of point `p` draws its information bits from stream
//! `bits_stream(frame_id(p, f))` and its noise from `noise_stream(..)`, so a
//! frame's outcome depends only on the master seed and its coordinates.
//! Frames are computed in parallel batches and folded in frame order, and the
//! stop rule is applied frame by frame during the fold: the report does not
//! depend on the batch size or on the number of workers.

use rand::Rng;
use rayon::prelude::*;

use crate::convcode::{ConvCode, Termination};
use crate::error::{Error, Result};
use crate::isi::{mlse_detect_with, ternary_threshold_detect, IsiChannel};
use crate::metric::{LevelMap, MetricSpec, NllTable};
use crate::trellis::Trellis;
use crate::viterbi::{viterbi_decode_block, EndRule};

use super::channel::{add_noise, bsc_transmit, noise_sigma, ChannelSpec};
use super::quantize::Quantizer;
use super::report::{BerReport, BerRow};
use super::rng::{bits_stream, frame_id, noise_stream, stream_rng};

pub const DEFAULT_MIN_ERRORS: u64 = 100;
pub const DEFAULT_MAX_BITS: u64 = 10_000_000;
pub const DEFAULT_CODED_FRAME_BITS: usize = 1000;
pub const DEFAULT_UNCODED_FRAME_BITS: usize = 10_000;
pub const DEFAULT_SOFT_BITS: u32 = 3;

/// Decoder input for convolutional codes on the AWGN channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CodedMetric {
    /// Sign decisions, Hamming metric.
    Hard,
    /// `bits`-bit quantized samples with a matched NLL table. The step
    /// defaults to `0.25 * (sigma + 1)`.
    Soft { bits: u32, step: Option<f64> },
    /// Raw samples, squared euclidean metric.
    Unquantized,
}

impl CodedMetric {
    pub fn soft() -> CodedMetric {
        CodedMetric::Soft {
            bits: DEFAULT_SOFT_BITS,
            step: None,
        }
    }

    fn describe(&self) -> String {
        match self {
            CodedMetric::Hard => "hard".into(),
            CodedMetric::Soft { bits, step: None } => format!("soft q={bits} step=0.25*(sigma+1)"),
            CodedMetric::Soft { bits, step: Some(s) } => format!("soft q={bits} step={s}"),
            CodedMetric::Unquantized => "unquantized".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsiDetector {
    Mlse,
    /// Ternary slicing; only for binary `1 - D^k` channels.
    Threshold,
}

#[derive(Debug, Clone, PartialEq)]
pub enum System {
    Coded {
        code: ConvCode,
        metric: CodedMetric,
        frame_bits: usize,
    },
    Isi {
        channel: IsiChannel,
        detector: IsiDetector,
        frame_bits: usize,
    },
    Uncoded {
        frame_bits: usize,
    },
}

impl System {
    pub fn coded(code: ConvCode, metric: CodedMetric) -> System {
        System::Coded {
            code,
            metric,
            frame_bits: DEFAULT_CODED_FRAME_BITS,
        }
    }

    pub fn isi(channel: IsiChannel, detector: IsiDetector) -> System {
        System::Isi {
            channel,
            detector,
            frame_bits: DEFAULT_CODED_FRAME_BITS,
        }
    }

    pub fn uncoded() -> System {
        System::Uncoded {
            frame_bits: DEFAULT_UNCODED_FRAME_BITS,
        }
    }

    pub fn frame_bits(&self) -> usize {
        match *self {
            System::Coded { frame_bits, .. } | System::Isi { frame_bits, .. } | System::Uncoded { frame_bits } => {
                frame_bits
            }
        }
    }

    fn describe(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        match self {
            System::Coded { code, metric, .. } => {
                out.push(("system".into(), "coded".into()));
                out.push(("code".into(), code.to_string()));
                out.push(("metric".into(), metric.describe()));
                out.push(("termination".into(), "zero-tail".into()));
            }
            System::Isi { channel, detector, .. } => {
                out.push(("system".into(), "isi".into()));
                out.push(("taps".into(), join(channel.taps())));
                out.push(("alphabet".into(), join(channel.alphabet())));
                out.push((
                    "detector".into(),
                    match detector {
                        IsiDetector::Mlse => "mlse",
                        IsiDetector::Threshold => "threshold",
                    }
                    .into(),
                ));
            }
            System::Uncoded { .. } => out.push(("system".into(), "uncoded".into())),
        }
        out.push(("frame_bits".into(), self.frame_bits().to_string()));
        out
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// What the sweep points measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// Points are Eb/N0 in dB.
    Awgn,
    /// Points are crossover probabilities.
    Bsc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_bits: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            min_errors: DEFAULT_MIN_ERRORS,
            max_bits: DEFAULT_MAX_BITS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub system: System,
    pub noise: NoiseKind,
    pub points: Vec<f64>,
    pub stop: StopRule,
    pub seed: u64,
    /// Worker threads; 0 uses the default pool. Never affects the report.
    pub workers: usize,
}

impl SweepConfig {
    pub fn new(system: System, noise: NoiseKind, points: Vec<f64>, seed: u64) -> SweepConfig {
        SweepConfig {
            system,
            noise,
            points,
            stop: StopRule::default(),
            seed,
            workers: 0,
        }
    }
}

/// Per-point state shared by all frames of the point.
struct Point<'a> {
    system: &'a System,
    trellis: Option<Trellis>,
    channel: ChannelSpec,
    sigma: f64,
    table: Option<MetricSpec>,
    seed: u64,
}

impl<'a> Point<'a> {
    fn new(system: &'a System, noise: NoiseKind, value: f64, seed: u64, trellis: Option<Trellis>) -> Result<Self> {
        let frame_bits = system.frame_bits();
        let rate = match system {
            System::Coded { code, .. } => frame_bits as f64 / ((frame_bits + code.memory()) * code.n()) as f64,
            _ => 1.0,
        };
        let channel = match noise {
            NoiseKind::Awgn => ChannelSpec::Awgn { ebn0_db: value, rate },
            NoiseKind::Bsc => ChannelSpec::Bsc { p: value },
        };
        channel.validate()?;
        let sigma = match channel {
            ChannelSpec::Awgn { ebn0_db, rate } => noise_sigma(ebn0_db, rate)?,
            ChannelSpec::Bsc { .. } => 0.0,
        };
        let table = match (system, noise) {
            (System::Coded { metric: CodedMetric::Soft { bits, step }, .. }, NoiseKind::Awgn) => {
                let q = Quantizer::new(*bits, step.unwrap_or(0.25 * (sigma + 1.0)))?;
                // a noiseless channel still needs a usable table
                Some(MetricSpec::NllTable(NllTable::gaussian(&q, sigma.max(1e-3))?))
            }
            _ => None,
        };
        Ok(Point {
            system,
            trellis,
            channel,
            sigma,
            table,
            seed,
        })
    }

    /// Information bits and bit errors of one frame.
    fn frame(&self, id: u64) -> Result<(u64, u64)> {
        let n = self.system.frame_bits();
        let mut rng = stream_rng(self.seed, bits_stream(id));
        let info: Vec<u8> = (0..n).map(|_| rng.random::<bool>() as u8).collect();
        let noise = noise_stream(id);
        let decided: Vec<u8> = match self.system {
            System::Uncoded { .. } => match self.channel {
                ChannelSpec::Bsc { p } => bsc_transmit(&info, p, self.seed, noise)?,
                ChannelSpec::Awgn { .. } => self.antipodal(&info, noise).iter().map(|&y| (y < 0.0) as u8).collect(),
            },
            System::Coded { code, metric, .. } => {
                let coded = code.encode(&info, Termination::ZeroTail)?;
                let trellis = self.trellis.as_ref().expect("coded systems carry a trellis");
                let (obs, spec): (Vec<f64>, MetricSpec) = match (self.channel, metric) {
                    (ChannelSpec::Bsc { p }, _) => (
                        bsc_transmit(&coded, p, self.seed, noise)?.iter().map(|&b| b as f64).collect(),
                        MetricSpec::Hamming,
                    ),
                    (ChannelSpec::Awgn { .. }, CodedMetric::Hard) => (
                        self.antipodal(&coded, noise).iter().map(|&y| (y < 0.0) as u8 as f64).collect(),
                        MetricSpec::Hamming,
                    ),
                    (ChannelSpec::Awgn { .. }, CodedMetric::Unquantized) => {
                        (self.antipodal(&coded, noise), MetricSpec::Euclidean(LevelMap::Antipodal))
                    }
                    (ChannelSpec::Awgn { .. }, CodedMetric::Soft { bits, step }) => {
                        let q = Quantizer::new(*bits, step.unwrap_or(0.25 * (self.sigma + 1.0)))?;
                        let levels = self
                            .antipodal(&coded, noise)
                            .iter()
                            .map(|&y| q.level(y).map(f64::from))
                            .collect::<Result<Vec<f64>>>()?;
                        (levels, self.table.clone().expect("soft points carry a table"))
                    }
                };
                let r = viterbi_decode_block(trellis, &obs, &spec, EndRule::ToStateZero)?;
                r.inputs[..n].iter().map(|&u| u as u8).collect()
            }
            System::Isi { channel, detector, .. } => {
                let symbols: Vec<f64> = info.iter().map(|&b| 1.0 - 2.0 * b as f64).collect();
                let mut samples = channel.apply_fir(&symbols, false)?;
                add_noise(&mut samples, self.sigma, self.seed, noise);
                let levels = match detector {
                    IsiDetector::Mlse => {
                        let trellis = self.trellis.as_ref().expect("isi systems carry a trellis");
                        mlse_detect_with(trellis, &samples, (self.sigma * self.sigma).max(1e-12))?.levels
                    }
                    IsiDetector::Threshold => ternary_threshold_detect(&samples, channel.memory()),
                };
                levels.iter().map(|&x| (x < 0.0) as u8).collect()
            }
        };
        let errors = info.iter().zip(&decided).filter(|(a, b)| a != b).count() as u64;
        Ok((n as u64, errors))
    }

    fn antipodal(&self, bits: &[u8], stream: u64) -> Vec<f64> {
        let mut levels: Vec<f64> = bits.iter().map(|&b| 1.0 - 2.0 * b as f64).collect();
        add_noise(&mut levels, self.sigma, self.seed, stream);
        levels
    }
}

fn is_difference_channel(channel: &IsiChannel) -> bool {
    let t = channel.taps();
    let binary = {
        let mut a = channel.alphabet().to_vec();
        a.sort_by(f64::total_cmp);
        a == [-1.0, 1.0]
    };
    binary && t.len() >= 2 && t[0] == 1.0 && t[t.len() - 1] == -1.0 && t[1..t.len() - 1].iter().all(|&x| x == 0.0)
}

fn validate(config: &SweepConfig) -> Result<()> {
    if config.points.is_empty() {
        return Err(Error::BadParams("sweep needs at least one point".into()));
    }
    if config.stop.min_errors == 0 || config.stop.max_bits == 0 {
        return Err(Error::BadParams("min_errors and max_bits must be at least 1".into()));
    }
    if config.points.iter().any(|p| p.is_nan()) {
        return Err(Error::BadParams("sweep point is NaN".into()));
    }
    if config.system.frame_bits() == 0 {
        return Err(Error::BadParams("frame_bits must be at least 1".into()));
    }
    match &config.system {
        System::Isi { channel, detector, .. } => {
            if config.noise == NoiseKind::Bsc {
                return Err(Error::InvalidChannel("ISI systems need an AWGN channel".into()));
            }
            if *detector == IsiDetector::Threshold && !is_difference_channel(channel) {
                return Err(Error::InvalidChannel(
                    "threshold detection needs a binary 1 - D^k channel".into(),
                ));
            }
        }
        System::Coded { code, .. } => {
            if code.n() > 1 << 20 {
                return Err(Error::InvalidCode("too many outputs".into()));
            }
        }
        System::Uncoded { .. } => {}
    }
    Ok(())
}

/// Runs every point of the sweep and returns the report, rows sorted by point.
pub fn run_sweep(config: &SweepConfig) -> Result<BerReport> {
    validate(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::BadParams(format!("worker pool: {e}")))?;
    let mut points = config.points.clone();
    points.sort_by(f64::total_cmp);

    let trellis = match &config.system {
        System::Coded { code, .. } => Some(code.trellis()),
        System::Isi { channel, .. } => Some(channel.trellis()?),
        System::Uncoded { .. } => None,
    };

    let mut rows = Vec::with_capacity(points.len());
    for (pi, &value) in points.iter().enumerate() {
        let point = Point::new(&config.system, config.noise, value, config.seed, trellis.clone())?;
        let (mut frames, mut bits, mut errors) = (0u64, 0u64, 0u64);
        let mut next = 0u64;
        let mut batch = 4u64;
        'point: loop {
            let results: Vec<(u64, u64)> = pool.install(|| {
                (next..next + batch)
                    .into_par_iter()
                    .map(|f| point.frame(frame_id(pi, f)))
                    .collect::<Result<_>>()
            })?;
            for (b, e) in results {
                frames += 1;
                bits += b;
                errors += e;
                if errors >= config.stop.min_errors || bits >= config.stop.max_bits {
                    break 'point;
                }
            }
            next += batch;
            batch = (batch * 2).min(256);
        }
        rows.push(BerRow::new(value, frames, bits, errors));
    }

    let mut echo = config.system.describe();
    echo.push((
        "channel".into(),
        match config.noise {
            NoiseKind::Awgn => "awgn (points are Eb/N0 dB)",
            NoiseKind::Bsc => "bsc (points are crossover probabilities)",
        }
        .into(),
    ));
    echo.push(("min_errors".into(), config.stop.min_errors.to_string()));
    echo.push(("max_bits".into(), config.stop.max_bits.to_string()));
    Ok(BerReport {
        rows,
        config: echo,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bsc_zero_gives_no_errors() {
        let mut cfg = SweepConfig::new(
            System::coded(ConvCode::from_octal(2, &["7", "5"]).unwrap(), CodedMetric::Hard),
            NoiseKind::Bsc,
            vec![0.0],
            3,
        );
        cfg.stop.max_bits = 20_000;
        let r = run_sweep(&cfg).unwrap();
        assert_eq!(r.rows[0].bit_errors, 0);
        assert!(r.rows[0].info_bits >= 20_000);
    }

    #[test]
    fn worker_count_does_not_change_the_report() {
        let mut cfg = SweepConfig::new(
            System::coded(ConvCode::from_octal(2, &["7", "5"]).unwrap(), CodedMetric::soft()),
            NoiseKind::Awgn,
            vec![1.0, 2.0],
            17,
        );
        cfg.stop = StopRule {
            min_errors: 50,
            max_bits: 200_000,
        };
        cfg.workers = 1;
        let a = run_sweep(&cfg).unwrap().to_csv();
        cfg.workers = 3;
        let b = run_sweep(&cfg).unwrap().to_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn threshold_needs_difference_channel() {
        let cfg = SweepConfig::new(
            System::isi(IsiChannel::duobinary(), IsiDetector::Threshold),
            NoiseKind::Awgn,
            vec![5.0],
            1,
        );
        assert!(matches!(run_sweep(&cfg), Err(Error::InvalidChannel(_))));
        assert!(is_difference_channel(&IsiChannel::class4()));
        assert!(is_difference_channel(&IsiChannel::dicode()));
    }
}
