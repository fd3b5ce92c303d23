use crate::error::{Error, Result};
use crate::metric::LevelMap;
use crate::trellis::Trellis;
use crate::viterbi::EndRule;

use super::log_add;

/// Natural log of the default likelihood floor, `e^-300`.
pub const DEFAULT_LOG_FLOOR: f64 = -300.0;

/// Likelihood of an observation vector given a branch output vector.
pub trait BranchLikelihood: Sync {
    fn likelihood(&self, output: &[f64], observation: &[f64]) -> f64;

    fn log_likelihood(&self, output: &[f64], observation: &[f64]) -> f64 {
        self.likelihood(output, observation).ln()
    }
}

impl<F> BranchLikelihood for F
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    fn likelihood(&self, output: &[f64], observation: &[f64]) -> f64 {
        self(output, observation)
    }
}

/// Independent Gaussian noise of a given variance on every output symbol,
/// after mapping symbols to levels. Matches the euclidean metric: the log
/// likelihood is an affine function of the squared distance.
#[derive(Debug, Clone, Copy)]
pub struct GaussianLikelihood {
    pub variance: f64,
    pub map: LevelMap,
}

impl GaussianLikelihood {
    pub fn new(variance: f64, map: LevelMap) -> Result<Self> {
        if variance.is_nan() || variance <= 0.0 {
            return Err(Error::BadParams(format!("noise variance must be positive, got {variance}")));
        }
        Ok(GaussianLikelihood { variance, map })
    }
}

impl BranchLikelihood for GaussianLikelihood {
    fn likelihood(&self, output: &[f64], observation: &[f64]) -> f64 {
        self.log_likelihood(output, observation).exp()
    }

    fn log_likelihood(&self, output: &[f64], observation: &[f64]) -> f64 {
        let norm = -0.5 * (2.0 * std::f64::consts::PI * self.variance).ln();
        output
            .iter()
            .zip(observation)
            .map(|(&s, &y)| {
                let d = y - self.map.level(s);
                norm - d * d / (2.0 * self.variance)
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcjrOptions {
    /// Log-likelihoods below this are raised to it; `None` rejects
    /// non-positive likelihoods instead.
    pub log_floor: Option<f64>,
    pub end: EndRule,
}

impl Default for BcjrOptions {
    fn default() -> Self {
        BcjrOptions {
            log_floor: Some(DEFAULT_LOG_FLOOR),
            end: EndRule::FreeEnd,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTable {
    sections: usize,
    num_inputs: usize,
    num_states: usize,
    inputs: Vec<f64>,
    states: Vec<f64>,
    /// Natural log of the probability of the observations.
    pub log_likelihood: f64,
}

impl PosteriorTable {
    pub fn sections(&self) -> usize {
        self.sections
    }

    /// P(input index | observations) for section `t`.
    pub fn input(&self, t: usize) -> &[f64] {
        &self.inputs[t * self.num_inputs..(t + 1) * self.num_inputs]
    }

    /// P(state at boundary `t` | observations), `t` in `0..=sections`.
    pub fn state(&self, t: usize) -> &[f64] {
        &self.states[t * self.num_states..(t + 1) * self.num_states]
    }

    /// Most probable input index per section (lowest index on ties).
    pub fn argmax_inputs(&self) -> Vec<usize> {
        (0..self.sections)
            .map(|t| {
                let p = self.input(t);
                (0..p.len()).fold(0, |best, u| if p[u] > p[best] { u } else { best })
            })
            .collect()
    }
}

/// Exact per-section posteriors by log-domain forward-backward recursion.
///
/// `observations` is the flat concatenation of one observation vector per
/// section. `priors`, when given, holds `sections * |alphabet|` input
/// probabilities; otherwise inputs are equiprobable.
pub fn bcjr(
    trellis: &Trellis,
    observations: &[f64],
    likelihood: &dyn BranchLikelihood,
    priors: Option<&[f64]>,
    options: BcjrOptions,
) -> Result<PosteriorTable> {
    let n = trellis.outputs_per_branch();
    let k = trellis.num_inputs();
    let s_count = trellis.num_states();
    if observations.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !observations.len().is_multiple_of(n) {
        return Err(Error::LengthMismatch {
            expected: observations.len().div_ceil(n) * n,
            found: observations.len(),
        });
    }
    let sections = observations.len() / n;

    let log_priors: Vec<f64> = match priors {
        Some(p) => {
            if p.len() != sections * k {
                return Err(Error::LengthMismatch {
                    expected: sections * k,
                    found: p.len(),
                });
            }
            for (t, row) in p.chunks(k).enumerate() {
                let sum: f64 = row.iter().sum();
                if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidPriors(format!("section {t} priors {row:?}")));
                }
            }
            p.iter().map(|x| x.ln()).collect()
        }
        None => vec![-(k as f64).ln(); sections * k],
    };

    // log gamma per (section, branch), priors included
    let classes = trellis.num_output_classes();
    let mut class_ll = vec![0.0; classes];
    let mut gamma = vec![0.0; sections * trellis.num_branches()];
    for t in 0..sections {
        let obs = &observations[t * n..(t + 1) * n];
        for (c, ll) in class_ll.iter_mut().enumerate() {
            let v = likelihood.log_likelihood(trellis.class_output(c), obs);
            *ll = match options.log_floor {
                _ if v.is_nan() => return Err(Error::NonpositiveLikelihood { section: t, value: v }),
                Some(floor) => v.max(floor),
                None if v.is_infinite() => {
                    return Err(Error::NonpositiveLikelihood { section: t, value: v.exp() })
                }
                None => v,
            };
        }
        let row = &mut gamma[t * trellis.num_branches()..(t + 1) * trellis.num_branches()];
        for (b, g) in row.iter_mut().enumerate() {
            *g = class_ll[trellis.output_class(b)] + log_priors[t * k + b % k];
        }
    }

    let branches = trellis.num_branches();
    let (alpha, beta) = rayon::join(
        || {
            let mut alpha = vec![f64::NEG_INFINITY; (sections + 1) * s_count];
            alpha[trellis.initial_state()] = 0.0;
            for t in 0..sections {
                for b in 0..branches {
                    let br = trellis.branch(b);
                    let from = alpha[t * s_count + br.from];
                    let slot = &mut alpha[(t + 1) * s_count + br.to];
                    *slot = log_add(*slot, from + gamma[t * branches + b]);
                }
            }
            alpha
        },
        || {
            let mut beta = vec![f64::NEG_INFINITY; (sections + 1) * s_count];
            match options.end {
                EndRule::FreeEnd => beta[sections * s_count..].fill(0.0),
                EndRule::ToStateZero => beta[sections * s_count] = 0.0,
            }
            for t in (0..sections).rev() {
                for b in 0..branches {
                    let br = trellis.branch(b);
                    let to = beta[(t + 1) * s_count + br.to];
                    let slot = &mut beta[t * s_count + br.from];
                    *slot = log_add(*slot, to + gamma[t * branches + b]);
                }
            }
            beta
        },
    );

    let total = (0..s_count).fold(f64::NEG_INFINITY, |acc, s| {
        log_add(acc, alpha[sections * s_count + s] + beta[sections * s_count + s])
    });
    if total == f64::NEG_INFINITY {
        return Err(Error::ImpossibleObservation { sequence: None });
    }

    let mut inputs = vec![0.0; sections * k];
    let mut acc = vec![f64::NEG_INFINITY; k];
    for t in 0..sections {
        acc.fill(f64::NEG_INFINITY);
        for b in 0..branches {
            let br = trellis.branch(b);
            let v = alpha[t * s_count + br.from] + gamma[t * branches + b] + beta[(t + 1) * s_count + br.to];
            acc[br.input] = log_add(acc[br.input], v);
        }
        normalize_into(&acc, total, &mut inputs[t * k..(t + 1) * k]);
    }
    let mut states = vec![0.0; (sections + 1) * s_count];
    let mut joint = vec![0.0; s_count];
    for t in 0..=sections {
        for s in 0..s_count {
            joint[s] = alpha[t * s_count + s] + beta[t * s_count + s];
        }
        normalize_into(&joint, total, &mut states[t * s_count..(t + 1) * s_count]);
    }

    Ok(PosteriorTable {
        sections,
        num_inputs: k,
        num_states: s_count,
        inputs,
        states,
        log_likelihood: total,
    })
}

fn normalize_into(log_values: &[f64], total: f64, out: &mut [f64]) {
    for (o, &v) in out.iter_mut().zip(log_values) {
        *o = (v - total).exp();
    }
    let sum: f64 = out.iter().sum();
    for o in out.iter_mut() {
        *o /= sum;
    }
}
