//! Command-line front end.
//!
//! File formats:
//!
//! * bit files: ASCII `0` and `1`; whitespace is ignored.
//! * sample files: one decimal real per line; blank lines are skipped.
//! * symbol files: one observation sequence per line, whitespace-separated
//!   integers.
//!
//! Exit status is 0 on success, 1 on a runtime failure and 2 on a usage or
//! configuration error. Output files are written to a temporary file in the
//! destination directory and renamed into place only on success.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::convcode::{ConvCode, Termination};
use crate::error::{Error, Result};
use crate::hmm::{hmm_forward_backward, hmm_viterbi, viterbi_training_step, HmmModel, DEFAULT_SMOOTHING};
use crate::isi::{mlse_detect, ternary_threshold_detect, IsiChannel};
use crate::metric::{LevelMap, MetricSpec, NllTable};
use crate::sim::quantize::Quantizer;
use crate::sim::report::{coding_gain, BerReport};
use crate::sim::sweep::{run_sweep, CodedMetric, IsiDetector, NoiseKind, StopRule, SweepConfig, System};
use crate::stream::stream_decode;
use crate::viterbi::{viterbi_decode_block, EndRule};

#[derive(Debug, Parser)]
#[command(name = "trellis", version, about = "Trellis detection toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a bit file with a convolutional code.
    Encode(EncodeArgs),
    /// Viterbi-decode received bits or samples.
    Decode(DecodeArgs),
    /// Detect symbols sent through an ISI channel.
    IsiDetect(IsiDetectArgs),
    /// Most probable HMM state paths for symbol sequences.
    HmmDecode(HmmDecodeArgs),
    /// Viterbi training of an HMM.
    HmmTrain(HmmTrainArgs),
    /// Monte Carlo BER sweep written as CSV.
    Sweep(SweepArgs),
    /// Coding gain between two sweep CSVs.
    Gain(GainArgs),
}

#[derive(Debug, Args)]
pub struct CodeSource {
    /// Code config file (INI, section [code]).
    #[arg(long, conflicts_with = "preset")]
    pub code: Option<PathBuf>,
    /// Named code: gsm, is95 or nasa.
    #[arg(long)]
    pub preset: Option<String>,
}

impl CodeSource {
    fn load(&self) -> Result<ConvCode> {
        match (&self.code, &self.preset) {
            (Some(path), _) => ConvCode::from_ini_file(path),
            (None, Some(name)) => preset_code(name),
            (None, None) => Err(Error::BadParams("one of --code or --preset is required".into())),
        }
    }
}

fn preset_code(name: &str) -> Result<ConvCode> {
    ConvCode::preset(name).ok_or_else(|| Error::BadParams(format!("unknown code preset '{name}'")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TerminationArg {
    ZeroTail,
    Unterminated,
}

impl From<TerminationArg> for Termination {
    fn from(t: TerminationArg) -> Self {
        match t {
            TerminationArg::ZeroTail => Termination::ZeroTail,
            TerminationArg::Unterminated => Termination::Unterminated,
        }
    }
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub source: CodeSource,
    /// Information bit file.
    #[arg(long)]
    pub input: PathBuf,
    /// Output bit file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "zero-tail")]
    pub termination: TerminationArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecodeMetric {
    /// Input is a bit file; Hamming metric.
    Hard,
    /// Input is a sample file (0 -> +1, 1 -> -1); squared euclidean metric.
    Euclidean,
    /// Input is a sample file, quantized and scored with a Gaussian NLL table.
    Soft,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[command(flatten)]
    pub source: CodeSource,
    /// Received bit file (hard) or sample file (euclidean, soft).
    #[arg(long)]
    pub input: PathBuf,
    /// Decoded information bit file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "hard")]
    pub metric: DecodeMetric,
    /// zero-tail decodes to state 0 and drops the tail bits.
    #[arg(long, value_enum, default_value = "zero-tail")]
    pub termination: TerminationArg,
    /// Noise standard deviation (soft metric only).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Quantizer bits (soft metric only).
    #[arg(long, default_value_t = 3)]
    pub quant_bits: u32,
    /// Quantizer step; defaults to 0.25 * (sigma + 1).
    #[arg(long)]
    pub step: Option<f64>,
    /// Decode with a fixed-delay streaming decoder of this traceback depth.
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DetectorArg {
    Mlse,
    Threshold,
}

#[derive(Debug, Args)]
pub struct IsiDetectArgs {
    /// Channel config file (INI, section [channel]).
    #[arg(long, conflicts_with = "preset")]
    pub channel: Option<PathBuf>,
    /// Named channel: dicode, class4 or duobinary.
    #[arg(long)]
    pub preset: Option<String>,
    /// Sample file, one sample per symbol.
    #[arg(long)]
    pub input: PathBuf,
    /// Detected levels as a sample file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "mlse")]
    pub detector: DetectorArg,
    /// Noise variance; only scales the reported log-likelihood.
    #[arg(long, default_value_t = 1.0)]
    pub noise_variance: f64,
}

impl IsiDetectArgs {
    fn load(&self) -> Result<IsiChannel> {
        load_channel(self.channel.as_deref(), self.preset.as_deref())
    }
}

fn load_channel(path: Option<&Path>, preset: Option<&str>) -> Result<IsiChannel> {
    match (path, preset) {
        (Some(path), _) => IsiChannel::from_ini_file(path),
        (None, Some(name)) => {
            IsiChannel::preset(name).ok_or_else(|| Error::BadParams(format!("unknown channel preset '{name}'")))
        }
        (None, None) => Err(Error::BadParams("one of --channel or --preset is required".into())),
    }
}

#[derive(Debug, Args)]
pub struct HmmDecodeArgs {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Symbol file.
    #[arg(long)]
    pub input: PathBuf,
    /// State paths, one line per sequence; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write per-sequence log joint probability and log-likelihood here.
    #[arg(long)]
    pub scores: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HmmTrainArgs {
    /// Initial model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Training symbol file.
    #[arg(long)]
    pub input: PathBuf,
    /// Trained model file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
    /// Add-delta smoothing of the counts.
    #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
    pub smoothing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMetric {
    Hard,
    Soft,
    Unquantized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepSystem {
    Coded,
    Isi,
    Uncoded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Awgn,
    Bsc,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// System under test; inferred from --preset/--code or --channel/--isi-preset when omitted.
    #[arg(long, value_enum)]
    pub system: Option<SweepSystem>,
    #[command(flatten)]
    pub source: CodeSource,
    /// ISI channel config file.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    /// Named ISI channel: dicode, class4 or duobinary.
    #[arg(long)]
    pub isi_preset: Option<String>,
    #[arg(long, value_enum, default_value = "soft")]
    pub metric: SweepMetric,
    #[arg(long, value_enum, default_value = "mlse")]
    pub detector: DetectorArg,
    #[arg(long, value_enum, default_value = "awgn")]
    pub noise: NoiseArg,
    /// Points as start:step:stop (stop inclusive); Eb/N0 dB or crossover probability.
    #[arg(long)]
    pub snr: String,
    /// Master seed (required).
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::sim::sweep::DEFAULT_MIN_ERRORS)]
    pub min_errors: u64,
    #[arg(long, default_value_t = crate::sim::sweep::DEFAULT_MAX_BITS)]
    pub max_bits: u64,
    /// Information bits per frame.
    #[arg(long)]
    pub frame_bits: Option<usize>,
    /// Quantizer bits for the soft metric.
    #[arg(long, default_value_t = crate::sim::sweep::DEFAULT_SOFT_BITS)]
    pub quant_bits: u32,
    /// Quantizer step for the soft metric; defaults to 0.25 * (sigma + 1).
    #[arg(long)]
    pub step: Option<f64>,
    /// Worker threads (0 = all cores); does not change the output.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// CSV output file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GainArgs {
    /// Sweep CSV of the coded system.
    #[arg(long)]
    pub coded: PathBuf,
    /// Sweep CSV of the reference system.
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub target_ber: f64,
}

/// Parses `start:step:stop`, including `stop` when within 1e-9 of a grid point.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::BadParams(format!("range '{text}' is not start:step:stop"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (start, step, stop) = match parts[..] {
        [single] => (single, 1.0, single),
        [a, b, c] => (a, b, c),
        _ => return Err(bad()),
    };
    if !(start.is_finite() && step.is_finite() && stop.is_finite()) || step <= 0.0 || stop < start - 1e-9 {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(Error::BadParams(format!("range '{text}' has too many points")));
    }
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

pub fn parse_bits(text: &str) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        for c in line.chars() {
            match c {
                '0' => out.push(0),
                '1' => out.push(1),
                c if c.is_whitespace() => {}
                c => return Err(Error::config(Some(i + 1), format!("unexpected character '{c}' in bit file"))),
            }
        }
    }
    Ok(out)
}

pub fn format_bits(bits: &[u8]) -> String {
    let mut s: String = bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect();
    s.push('\n');
    s
}

pub fn parse_samples(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::config(Some(i + 1), format!("bad sample '{}'", l.trim())))
        })
        .collect()
}

pub fn format_samples(samples: &[f64]) -> String {
    let mut s = String::new();
    for v in samples {
        let _ = writeln!(s, "{v}");
    }
    s
}

pub fn parse_symbols(text: &str) -> Result<Vec<Vec<usize>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.split_whitespace()
                .map(|w| w.parse::<usize>().map_err(|_| Error::config(Some(i + 1), format!("bad symbol '{w}'"))))
                .collect()
        })
        .collect()
}

pub fn format_symbols(rows: &[Vec<usize>]) -> String {
    let mut s = String::new();
    for r in rows {
        let words: Vec<String> = r.iter().map(usize::to_string).collect();
        s.push_str(&words.join(" "));
        s.push('\n');
    }
    s
}

fn read_with<T>(path: &Path, parse: impl Fn(&str) -> Result<T>) -> Result<T> {
    let text = crate::config::read_file(path)?;
    parse(&text).map_err(|e| e.in_file(path))
}

/// Writes `contents` to `path` atomically, or to standard output.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            out.flush()?;
            Ok(())
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(contents.as_bytes())?;
            tmp.flush()?;
            tmp.persist(path).map_err(|e| Error::Io(e.error))?;
            Ok(())
        }
    }
}

pub fn encode(args: &EncodeArgs) -> Result<String> {
    let code = args.source.load()?;
    let info = read_with(&args.input, parse_bits)?;
    Ok(format_bits(&code.encode(&info, args.termination.into())?))
}

pub fn decode(args: &DecodeArgs) -> Result<String> {
    let code = args.source.load()?;
    let trellis = code.trellis();
    let (obs, spec) = match args.metric {
        DecodeMetric::Hard => (
            read_with(&args.input, parse_bits)?.iter().map(|&b| b as f64).collect(),
            MetricSpec::Hamming,
        ),
        DecodeMetric::Euclidean => (
            read_with(&args.input, parse_samples)?,
            MetricSpec::Euclidean(LevelMap::Antipodal),
        ),
        DecodeMetric::Soft => {
            let sigma = args
                .sigma
                .ok_or_else(|| Error::BadParams("--sigma is required with --metric soft".into()))?;
            let q = Quantizer::new(args.quant_bits, args.step.unwrap_or(0.25 * (sigma + 1.0)))?;
            let table = NllTable::gaussian(&q, sigma)?;
            let samples = read_with(&args.input, parse_samples)?;
            let levels = samples
                .iter()
                .map(|&s| q.level(s).map(f64::from))
                .collect::<Result<Vec<f64>>>()?;
            (levels, MetricSpec::NllTable(table))
        }
    };
    let end = match args.termination {
        TerminationArg::ZeroTail => EndRule::ToStateZero,
        TerminationArg::Unterminated => EndRule::FreeEnd,
    };
    let labels: Vec<f64> = match args.depth {
        Some(depth) => stream_decode(&trellis, &spec, &obs, depth, end)?,
        None => viterbi_decode_block(&trellis, &obs, &spec, end)?.labels(&trellis),
    };
    let keep = match args.termination {
        TerminationArg::ZeroTail => labels.len().saturating_sub(code.memory()),
        TerminationArg::Unterminated => labels.len(),
    };
    let bits: Vec<u8> = labels[..keep].iter().map(|&l| l as u8).collect();
    Ok(format_bits(&bits))
}

pub fn isi_detect(args: &IsiDetectArgs) -> Result<String> {
    let channel = args.load()?;
    let samples = read_with(&args.input, parse_samples)?;
    let levels = match args.detector {
        DetectorArg::Mlse => mlse_detect(&channel, &samples, args.noise_variance)?.levels,
        DetectorArg::Threshold => ternary_threshold_detect(&samples, channel.memory()),
    };
    Ok(format_samples(&levels))
}

/// State paths, and the per-sequence score lines.
pub fn hmm_decode(args: &HmmDecodeArgs) -> Result<(String, String)> {
    let model = HmmModel::from_json_file(&args.model)?;
    let data = read_with(&args.input, parse_symbols)?;
    let mut paths = Vec::with_capacity(data.len());
    let mut scores = String::from("sequence,log_joint,log_likelihood\n");
    for (i, obs) in data.iter().enumerate() {
        let tag = |e: Error| match e {
            Error::ImpossibleObservation { .. } => Error::ImpossibleObservation { sequence: Some(i) },
            other => other,
        };
        let (path, lp) = hmm_viterbi(&model, obs).map_err(tag)?;
        let ll = hmm_forward_backward(&model, obs).map_err(tag)?.log_likelihood;
        let _ = writeln!(scores, "{i},{lp},{ll}");
        paths.push(path);
    }
    Ok((format_symbols(&paths), scores))
}

pub fn hmm_train(args: &HmmTrainArgs) -> Result<(String, Vec<f64>)> {
    let mut model = HmmModel::from_json_file(&args.model)?;
    let data = read_with(&args.input, parse_symbols)?;
    let mut history = Vec::with_capacity(args.iterations);
    for _ in 0..args.iterations {
        let step = viterbi_training_step(&model, &data, args.smoothing)?;
        history.push(step.total_log_joint);
        model = step.model;
    }
    let mut json = model.to_json_string();
    json.push('\n');
    Ok((json, history))
}

pub fn sweep_config(args: &SweepArgs) -> Result<SweepConfig> {
    let system_kind = match args.system {
        Some(k) => k,
        None if args.source.code.is_some() || args.source.preset.is_some() => SweepSystem::Coded,
        None if args.channel.is_some() || args.isi_preset.is_some() => SweepSystem::Isi,
        None => return Err(Error::BadParams("choose --system, a code (--preset/--code) or a channel".into())),
    };
    let mut system = match system_kind {
        SweepSystem::Coded => {
            let metric = match args.metric {
                SweepMetric::Hard => CodedMetric::Hard,
                SweepMetric::Soft => CodedMetric::Soft {
                    bits: args.quant_bits,
                    step: args.step,
                },
                SweepMetric::Unquantized => CodedMetric::Unquantized,
            };
            System::coded(args.source.load()?, metric)
        }
        SweepSystem::Isi => System::isi(
            load_channel(args.channel.as_deref(), args.isi_preset.as_deref())?,
            match args.detector {
                DetectorArg::Mlse => IsiDetector::Mlse,
                DetectorArg::Threshold => IsiDetector::Threshold,
            },
        ),
        SweepSystem::Uncoded => System::uncoded(),
    };
    if let Some(n) = args.frame_bits {
        match &mut system {
            System::Coded { frame_bits, .. } | System::Isi { frame_bits, .. } | System::Uncoded { frame_bits } => {
                *frame_bits = n
            }
        }
    }
    let noise = match args.noise {
        NoiseArg::Awgn => NoiseKind::Awgn,
        NoiseArg::Bsc => NoiseKind::Bsc,
    };
    let mut config = SweepConfig::new(system, noise, parse_range(&args.snr)?, args.seed);
    config.stop = StopRule {
        min_errors: args.min_errors,
        max_bits: args.max_bits,
    };
    config.workers = args.workers;
    Ok(config)
}

pub fn gain(args: &GainArgs) -> Result<f64> {
    let coded = read_with(&args.coded, BerReport::from_csv)?;
    let reference = read_with(&args.reference, BerReport::from_csv)?;
    coding_gain(&coded, &reference, args.target_ber)
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Encode(a) => write_output(a.output.as_deref(), &encode(a)?),
        Command::Decode(a) => write_output(a.output.as_deref(), &decode(a)?),
        Command::IsiDetect(a) => write_output(a.output.as_deref(), &isi_detect(a)?),
        Command::HmmDecode(a) => {
            let (paths, scores) = hmm_decode(a)?;
            if let Some(p) = &a.scores {
                write_output(Some(p), &scores)?;
            }
            write_output(a.output.as_deref(), &paths)
        }
        Command::HmmTrain(a) => {
            let (json, history) = hmm_train(a)?;
            write_output(a.output.as_deref(), &json)?;
            for (i, lp) in history.iter().enumerate() {
                eprintln!("iteration {}: total best-path log probability {lp}", i + 1);
            }
            Ok(())
        }
        Command::Sweep(a) => {
            let config = sweep_config(a)?;
            write_output(a.output.as_deref(), &run_sweep(&config)?.to_csv())
        }
        Command::Gain(a) => write_output(None, &format!("{:.2}\n", gain(a)?)),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}
