//! Intersymbol-interference channels and maximum-likelihood sequence
//! detection on equalized partial-response samples.
//!
//! A channel with taps `h_0..h_m` produces `y_t = sum_i h_i x_{t-i}` with
//! `x_t = 0` before the first symbol. Its trellis state is the history
//! `(x_{t-1}, ..., x_{t-m})`. When `0` is not a PAM level the first `m`
//! sections pass through transient start states whose older history entries
//! are still zero, so the trellis reproduces [`IsiChannel::apply_fir`] from
//! the very first sample.

use std::path::Path;

use crate::config;
use crate::error::{Error, Result};
use crate::metric::{LevelMap, MetricSpec};
use crate::trellis::Trellis;
use crate::viterbi::{decode_with, DecoderOptions, EndRule, Observed};

/// Largest trellis [`IsiChannel::trellis`] will build.
pub const MAX_ISI_STATES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct IsiChannel {
    taps: Vec<f64>,
    alphabet: Vec<f64>,
}

impl IsiChannel {
    pub fn new(taps: Vec<f64>, alphabet: Vec<f64>) -> Result<IsiChannel> {
        if taps.is_empty() {
            return Err(Error::InvalidChannel("at least one tap is required".into()));
        }
        if taps[0] == 0.0 {
            return Err(Error::InvalidChannel("leading tap h_0 must be nonzero".into()));
        }
        if taps.iter().chain(&alphabet).any(|v| !v.is_finite()) {
            return Err(Error::InvalidChannel("taps and levels must be finite".into()));
        }
        if alphabet.len() < 2 {
            return Err(Error::InvalidChannel("alphabet needs at least two levels".into()));
        }
        for (i, a) in alphabet.iter().enumerate() {
            if alphabet[..i].contains(a) {
                return Err(Error::InvalidChannel(format!("level {a} listed twice")));
            }
        }
        Ok(IsiChannel { taps, alphabet })
    }

    /// Binary `{+1, -1}` input.
    pub fn binary(taps: Vec<f64>) -> Result<IsiChannel> {
        IsiChannel::new(taps, vec![1.0, -1.0])
    }

    /// `1 - D`
    pub fn dicode() -> IsiChannel {
        IsiChannel::binary(vec![1.0, -1.0]).unwrap()
    }

    /// Class IV partial response, `1 - D^2`.
    pub fn class4() -> IsiChannel {
        IsiChannel::binary(vec![1.0, 0.0, -1.0]).unwrap()
    }

    /// `1 + D`
    pub fn duobinary() -> IsiChannel {
        IsiChannel::binary(vec![1.0, 1.0]).unwrap()
    }

    pub fn preset(name: &str) -> Option<IsiChannel> {
        match name {
            "dicode" => Some(IsiChannel::dicode()),
            "class4" => Some(IsiChannel::class4()),
            "duobinary" => Some(IsiChannel::duobinary()),
            _ => None,
        }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn alphabet(&self) -> &[f64] {
        &self.alphabet
    }

    pub fn memory(&self) -> usize {
        self.taps.len() - 1
    }

    /// Number of steady-state (all-real-history) states, `|alphabet|^m`.
    pub fn interior_states(&self) -> usize {
        self.alphabet.len().pow(self.memory() as u32)
    }

    pub fn apply_fir(&self, symbols: &[f64], flush: bool) -> Result<Vec<f64>> {
        if let Some(&bad) = symbols.iter().find(|x| !self.alphabet.contains(x)) {
            return Err(Error::InvalidLevel(bad));
        }
        let m = self.memory();
        let len = symbols.len() + if flush && !symbols.is_empty() { m } else { 0 };
        Ok((0..len)
            .map(|t| {
                self.taps
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i <= t && t - i < symbols.len())
                    .map(|(i, h)| h * symbols[t - i])
                    .sum()
            })
            .collect())
    }

    pub fn trellis(&self) -> Result<Trellis> {
        let m = self.memory();
        let zero_is_level = self.alphabet.contains(&0.0);
        // history symbols: 0 = "before the start" (or level 0), else alphabet index + 1
        let base = self.alphabet.len() + 1;
        let count = self.alphabet.len().saturating_pow(m as u32);
        if count > MAX_ISI_STATES {
            return Err(Error::TooManyStates(count));
        }
        let transient: usize = if zero_is_level {
            0
        } else {
            (0..m).map(|j| self.alphabet.len().pow(j as u32)).sum()
        };
        if count + transient > MAX_ISI_STATES {
            return Err(Error::TooManyStates(count + transient));
        }

        // a history is a digit vector, most recent first
        let level_of = |digit: usize| if digit == 0 { 0.0 } else { self.alphabet[digit - 1] };
        let canonical = |digits: &mut Vec<usize>| {
            if zero_is_level {
                let zero = self.alphabet.iter().position(|&a| a == 0.0).unwrap() + 1;
                for d in digits.iter_mut() {
                    if *d == 0 {
                        *d = zero;
                    }
                }
            }
        };
        let encode = |digits: &[usize]| digits.iter().fold(0usize, |acc, &d| acc * base + d);

        let mut start = vec![0usize; m];
        canonical(&mut start);
        let mut order: Vec<Vec<usize>> = vec![start.clone()];
        let mut index = std::collections::HashMap::new();
        index.insert(encode(&start), 0usize);
        let mut frontier = 0;
        while frontier < order.len() {
            let hist = order[frontier].clone();
            frontier += 1;
            for u in 0..self.alphabet.len() {
                let mut next = Vec::with_capacity(m);
                if m > 0 {
                    next.push(u + 1);
                    next.extend_from_slice(&hist[..m - 1]);
                }
                let key = encode(&next);
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(key) {
                    e.insert(order.len());
                    order.push(next);
                }
            }
        }
        // initial state first, the rest in history order
        let mut sorted: Vec<usize> = (1..order.len()).collect();
        sorted.sort_by_key(|&i| encode(&order[i]));
        let mut position = vec![0usize; order.len()];
        for (rank, &i) in sorted.iter().enumerate() {
            position[i] = rank + 1;
        }
        let mut histories = vec![Vec::new(); order.len()];
        for (i, h) in order.into_iter().enumerate() {
            histories[position[i]] = h;
        }
        let lookup: std::collections::HashMap<usize, usize> =
            histories.iter().enumerate().map(|(i, h)| (encode(h), i)).collect();

        let k = self.alphabet.len();
        let mut next_state = Vec::with_capacity(histories.len() * k);
        let mut outputs = Vec::with_capacity(histories.len() * k);
        for hist in &histories {
            for u in 0..k {
                let mut y = self.taps[0] * self.alphabet[u];
                for i in 1..=m {
                    y += self.taps[i] * level_of(hist[i - 1]);
                }
                outputs.push(y);
                let mut next = Vec::with_capacity(m);
                if m > 0 {
                    next.push(u + 1);
                    next.extend_from_slice(&hist[..m - 1]);
                }
                next_state.push(lookup[&encode(&next)]);
            }
        }
        Ok(Trellis::from_dense(
            histories.len(),
            self.alphabet.clone(),
            1,
            next_state,
            outputs,
        ))
    }

    pub fn from_ini_str(text: &str) -> Result<IsiChannel> {
        let entries = config::parse_ini(text)?;
        config::check_keys(&entries, "channel", &["taps", "alphabet", "preset"])?;
        let parse_list = |e: &config::Entry| -> Result<Vec<f64>> {
            e.value
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::config(Some(e.line), format!("invalid number `{}`", v.trim())))
                })
                .collect()
        };
        let preset = match config::find(&entries, "preset") {
            Some(e) => Some((
                IsiChannel::preset(&e.value)
                    .ok_or_else(|| Error::config(Some(e.line), format!("unknown preset `{}`", e.value)))?,
                e.line,
            )),
            None => None,
        };
        let taps = config::find(&entries, "taps").map(|e| parse_list(e).map(|t| (t, e.line))).transpose()?;
        let alphabet = config::find(&entries, "alphabet")
            .map(|e| parse_list(e).map(|a| (a, e.line)))
            .transpose()?;
        let line = taps
            .as_ref()
            .map(|t| t.1)
            .or(alphabet.as_ref().map(|a| a.1))
            .or(preset.as_ref().map(|p| p.1));
        let base = match (preset, taps) {
            (Some((p, _)), None) => p,
            (None, Some((t, l))) => IsiChannel::binary(t).map_err(|e| Error::config(Some(l), e.to_string()))?,
            (Some(_), Some((_, l))) => return Err(Error::config(Some(l), "give either `preset` or `taps`, not both")),
            (None, None) => return Err(Error::config(None, "missing key `taps` or `preset`")),
        };
        match alphabet {
            Some((a, l)) => IsiChannel::new(base.taps, a).map_err(|e| Error::config(Some(l), e.to_string())),
            None => Ok(base),
        }
        .map_err(|e| match e {
            Error::Config { line: None, message, path } => Error::Config { line, message, path },
            other => other,
        })
    }

    pub fn from_ini_file(path: impl AsRef<Path>) -> Result<IsiChannel> {
        let path = path.as_ref();
        let text = config::read_file(path)?;
        IsiChannel::from_ini_str(&text).map_err(|e| e.in_file(path))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlseOutput {
    pub levels: Vec<f64>,
    /// Squared euclidean distance between the samples and the re-filtered decision.
    pub distance: f64,
    /// Gaussian log-likelihood of the samples given the decision.
    pub log_likelihood: f64,
}

/// Maximum-likelihood level sequence for `samples` (one sample per symbol).
pub fn mlse_detect(channel: &IsiChannel, samples: &[f64], noise_variance: f64) -> Result<MlseOutput> {
    let trellis = channel.trellis()?;
    mlse_detect_with(&trellis, samples, noise_variance)
}

/// [`mlse_detect`] on a prebuilt channel trellis.
pub fn mlse_detect_with(trellis: &Trellis, samples: &[f64], noise_variance: f64) -> Result<MlseOutput> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if noise_variance.is_nan() || noise_variance <= 0.0 {
        return Err(Error::BadParams(format!("noise variance must be positive, got {noise_variance}")));
    }
    let spec = MetricSpec::Euclidean(LevelMap::Identity);
    let observed = Observed::new(trellis, &spec, samples)?;
    let r = decode_with(trellis, &observed, EndRule::FreeEnd, DecoderOptions::default())?;
    let n = samples.len() as f64;
    Ok(MlseOutput {
        levels: r.labels(trellis),
        distance: r.final_cost,
        log_likelihood: -0.5 * n * (2.0 * std::f64::consts::PI * noise_variance).ln()
            - r.final_cost / (2.0 * noise_variance),
    })
}

/// Symbol-by-symbol detection for binary `1 - D^lag` samples: each sample is
/// sliced to `{-2, 0, +2}` at thresholds `±1`, and the level is read off the
/// slice, falling back on the decision `lag` symbols earlier for a `0` slice.
/// The first `lag` samples carry their symbol directly and are sliced by sign.
pub fn ternary_threshold_detect(samples: &[f64], lag: usize) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(samples.len());
    for (t, &y) in samples.iter().enumerate() {
        let x = if t < lag {
            if y >= 0.0 { 1.0 } else { -1.0 }
        } else if y > 1.0 {
            1.0
        } else if y < -1.0 {
            -1.0
        } else {
            out[t - lag]
        };
        out.push(x);
    }
    out
}
