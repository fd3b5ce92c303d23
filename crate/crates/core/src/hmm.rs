//! Discrete hidden Markov models: Viterbi decoding, forward-backward
//! smoothing and Viterbi (segmental) training.
//!
//! Probabilities are held in log domain; exact zeros are `-inf`.
//!
//! Model files are JSON:
//!
//! ```json
//! {
//!   "n_states": 2,
//!   "n_symbols": 3,
//!   "initial": [0.6, 0.4],
//!   "transition": [[0.7, 0.3], [0.4, 0.6]],
//!   "emission": [[0.5, 0.4, 0.1], [0.1, 0.3, 0.6]]
//! }
//! ```
//!
//! `transition[i][j]` is P(next = j | current = i), `emission[i][k]` is
//! P(symbol k | state i). Every row and `initial` must sum to 1 within 1e-12.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// Default add-δ smoothing for [`viterbi_training_step`].
pub const DEFAULT_SMOOTHING: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelFile {
    n_states: usize,
    n_symbols: usize,
    initial: Vec<f64>,
    transition: Vec<Vec<f64>>,
    emission: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    n_states: usize,
    n_symbols: usize,
    log_initial: Vec<f64>,
    log_transition: Vec<f64>,
    log_emission: Vec<f64>,
}

fn check_distribution(name: &str, row: &[f64]) -> Result<()> {
    if row.iter().any(|&p| !(0.0..=1.0).contains(&p) || p.is_nan()) {
        return Err(Error::InvalidModel(format!("{name} has a value outside [0, 1]")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidModel(format!("{name} sums to {sum}, not 1")));
    }
    Ok(())
}

impl HmmModel {
    /// Builds a model from probability-domain parameters; `transition` is
    /// `n_states x n_states` and `emission` is `n_states x n_symbols`, row major.
    pub fn new(
        n_states: usize,
        n_symbols: usize,
        initial: &[f64],
        transition: &[f64],
        emission: &[f64],
    ) -> Result<HmmModel> {
        if n_states == 0 || n_symbols == 0 {
            return Err(Error::InvalidModel("need at least one state and one symbol".into()));
        }
        if initial.len() != n_states
            || transition.len() != n_states * n_states
            || emission.len() != n_states * n_symbols
        {
            return Err(Error::InvalidModel("parameter dimensions do not match n_states/n_symbols".into()));
        }
        check_distribution("initial", initial)?;
        for i in 0..n_states {
            check_distribution(&format!("transition row {i}"), &transition[i * n_states..(i + 1) * n_states])?;
            check_distribution(&format!("emission row {i}"), &emission[i * n_symbols..(i + 1) * n_symbols])?;
        }
        let ln = |v: &[f64]| v.iter().map(|p| p.ln()).collect::<Vec<_>>();
        Ok(HmmModel {
            n_states,
            n_symbols,
            log_initial: ln(initial),
            log_transition: ln(transition),
            log_emission: ln(emission),
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn initial(&self) -> Vec<f64> {
        self.log_initial.iter().map(|l| l.exp()).collect()
    }

    /// Row-major `n_states x n_states`.
    pub fn transition(&self) -> Vec<f64> {
        self.log_transition.iter().map(|l| l.exp()).collect()
    }

    /// Row-major `n_states x n_symbols`.
    pub fn emission(&self) -> Vec<f64> {
        self.log_emission.iter().map(|l| l.exp()).collect()
    }

    #[inline]
    pub fn log_initial(&self, i: usize) -> f64 {
        self.log_initial[i]
    }

    #[inline]
    pub fn log_transition(&self, from: usize, to: usize) -> f64 {
        self.log_transition[from * self.n_states + to]
    }

    #[inline]
    pub fn log_emission(&self, state: usize, symbol: usize) -> f64 {
        self.log_emission[state * self.n_symbols + symbol]
    }

    /// Log joint probability of a given state path and observation sequence.
    pub fn log_joint(&self, path: &[usize], obs: &[usize]) -> f64 {
        let mut lp = 0.0;
        for (t, (&s, &o)) in path.iter().zip(obs).enumerate() {
            lp += if t == 0 {
                self.log_initial(s)
            } else {
                self.log_transition(path[t - 1], s)
            };
            lp += self.log_emission(s, o);
        }
        lp
    }

    fn check_obs(&self, obs: &[usize]) -> Result<()> {
        if obs.is_empty() {
            return Err(Error::EmptyInput);
        }
        match obs.iter().position(|&o| o >= self.n_symbols) {
            Some(position) => Err(Error::InvalidSymbol {
                symbol: obs[position],
                position,
                n_symbols: self.n_symbols,
            }),
            None => Ok(()),
        }
    }

    pub fn from_json_str(text: &str) -> Result<HmmModel> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.transition.len() != file.n_states || file.emission.len() != file.n_states {
            return Err(Error::InvalidModel("matrix row count differs from n_states".into()));
        }
        if file.transition.iter().any(|r| r.len() != file.n_states)
            || file.emission.iter().any(|r| r.len() != file.n_symbols)
        {
            return Err(Error::InvalidModel("matrix row length differs from its declared size".into()));
        }
        let transition: Vec<f64> = file.transition.concat();
        let emission: Vec<f64> = file.emission.concat();
        HmmModel::new(file.n_states, file.n_symbols, &file.initial, &transition, &emission)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<HmmModel> {
        let path = path.as_ref();
        let text = crate::config::read_file(path)?;
        HmmModel::from_json_str(&text).map_err(|e| match e {
            Error::Json(err) => Error::Config {
                path: Some(path.to_path_buf()),
                line: Some(err.line()),
                message: err.to_string(),
            },
            Error::InvalidModel(msg) => Error::Config {
                path: Some(path.to_path_buf()),
                line: None,
                message: msg,
            },
            other => other,
        })
    }

    pub fn to_json_string(&self) -> String {
        let file = ModelFile {
            n_states: self.n_states,
            n_symbols: self.n_symbols,
            initial: self.initial(),
            transition: self.transition().chunks(self.n_states).map(<[f64]>::to_vec).collect(),
            emission: self.emission().chunks(self.n_symbols).map(<[f64]>::to_vec).collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }
}

/// Most probable state path and its log joint probability.
pub fn hmm_viterbi(model: &HmmModel, obs: &[usize]) -> Result<(Vec<usize>, f64)> {
    model.check_obs(obs)?;
    let n = model.n_states;
    let len = obs.len();
    let mut score: Vec<f64> = (0..n)
        .map(|i| model.log_initial(i) + model.log_emission(i, obs[0]))
        .collect();
    let mut next = vec![0.0; n];
    let mut back = vec![0usize; len * n];
    for t in 1..len {
        for j in 0..n {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (i, &s) in score.iter().enumerate() {
                let cand = s + model.log_transition(i, j);
                if cand > best {
                    best = cand;
                    arg = i;
                }
            }
            next[j] = best + model.log_emission(j, obs[t]);
            back[t * n + j] = arg;
        }
        std::mem::swap(&mut score, &mut next);
    }
    let mut end = 0;
    for (j, &s) in score.iter().enumerate() {
        if s > score[end] {
            end = j;
        }
    }
    let best = score[end];
    if best == f64::NEG_INFINITY {
        return Err(Error::ImpossibleObservation { sequence: None });
    }
    let mut path = vec![0; len];
    path[len - 1] = end;
    for t in (1..len).rev() {
        path[t - 1] = back[t * n + path[t]];
    }
    // exact log-domain sum along the path
    Ok((path.clone(), model.log_joint(&path, obs)))
}

fn log_sum(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Smoothing {
    n_states: usize,
    posteriors: Vec<f64>,
    pub log_likelihood: f64,
}

impl Smoothing {
    /// P(state at step t | observations).
    pub fn posterior(&self, t: usize) -> &[f64] {
        &self.posteriors[t * self.n_states..(t + 1) * self.n_states]
    }

    pub fn len(&self) -> usize {
        self.posteriors.len() / self.n_states
    }

    pub fn is_empty(&self) -> bool {
        self.posteriors.is_empty()
    }
}

/// Forward-backward smoothing posteriors and the sequence log-likelihood.
pub fn hmm_forward_backward(model: &HmmModel, obs: &[usize]) -> Result<Smoothing> {
    model.check_obs(obs)?;
    let n = model.n_states;
    let len = obs.len();
    let mut alpha = vec![f64::NEG_INFINITY; len * n];
    let mut beta = vec![0.0; len * n];
    for i in 0..n {
        alpha[i] = model.log_initial(i) + model.log_emission(i, obs[0]);
    }
    for t in 1..len {
        for j in 0..n {
            let prev = &alpha[(t - 1) * n..t * n];
            alpha[t * n + j] =
                log_sum((0..n).map(|i| prev[i] + model.log_transition(i, j))) + model.log_emission(j, obs[t]);
        }
    }
    for t in (0..len - 1).rev() {
        for i in 0..n {
            let after = &beta[(t + 1) * n..(t + 2) * n];
            beta[t * n + i] = log_sum(
                (0..n).map(|j| model.log_transition(i, j) + model.log_emission(j, obs[t + 1]) + after[j]),
            );
        }
    }
    let log_likelihood = log_sum(alpha[(len - 1) * n..].iter().copied());
    if log_likelihood == f64::NEG_INFINITY {
        return Err(Error::ImpossibleObservation { sequence: None });
    }
    let mut posteriors = vec![0.0; len * n];
    for t in 0..len {
        let row = &mut posteriors[t * n..(t + 1) * n];
        for (i, p) in row.iter_mut().enumerate() {
            *p = (alpha[t * n + i] + beta[t * n + i] - log_likelihood).exp();
        }
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(Smoothing {
        n_states: n,
        posteriors,
        log_likelihood,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingStep {
    pub model: HmmModel,
    /// Sum over the dataset of best-path log joint probabilities under the input model.
    pub total_log_joint: f64,
}

#[derive(Clone)]
struct Counts {
    initial: Vec<u64>,
    transition: Vec<u64>,
    emission: Vec<u64>,
    log_joint: f64,
}

/// One round of Viterbi training: decode every sequence, then re-estimate all
/// distributions from add-`smoothing` counts along the decoded paths.
pub fn viterbi_training_step(model: &HmmModel, dataset: &[Vec<usize>], smoothing: f64) -> Result<TrainingStep> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput);
    }
    if smoothing.is_nan() || smoothing <= 0.0 {
        return Err(Error::BadParams(format!("smoothing must be positive, got {smoothing}")));
    }
    let n = model.n_states;
    let m = model.n_symbols;
    let decoded: Vec<(Vec<usize>, f64)> = dataset
        .par_iter()
        .enumerate()
        .map(|(i, obs)| {
            hmm_viterbi(model, obs).map_err(|e| match e {
                Error::ImpossibleObservation { .. } => Error::ImpossibleObservation { sequence: Some(i) },
                other => other,
            })
        })
        .collect::<Result<_>>()?;

    // integer counts combine identically in any order
    let mut counts = Counts {
        initial: vec![0; n],
        transition: vec![0; n * n],
        emission: vec![0; n * m],
        log_joint: 0.0,
    };
    for ((path, lp), obs) in decoded.iter().zip(dataset) {
        counts.initial[path[0]] += 1;
        for w in path.windows(2) {
            counts.transition[w[0] * n + w[1]] += 1;
        }
        for (&s, &o) in path.iter().zip(obs) {
            counts.emission[s * m + o] += 1;
        }
        counts.log_joint += lp;
    }

    let normalize = |c: &[u64]| -> Vec<f64> {
        let total: f64 = c.iter().map(|&x| x as f64 + smoothing).sum();
        let mut p: Vec<f64> = c.iter().map(|&x| (x as f64 + smoothing) / total).collect();
        // absorb rounding so the row sums to 1 within tolerance
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        p
    };
    let initial = normalize(&counts.initial);
    let transition: Vec<f64> = counts.transition.chunks(n).flat_map(normalize).collect();
    let emission: Vec<f64> = counts.emission.chunks(m).flat_map(normalize).collect();
    Ok(TrainingStep {
        model: HmmModel::new(n, m, &initial, &transition, &emission)?,
        total_log_joint: counts.log_joint,
    })
}

/// Sum of best-path log joint probabilities over a dataset.
pub fn total_best_path_log_joint(model: &HmmModel, dataset: &[Vec<usize>]) -> Result<f64> {
    dataset
        .iter()
        .enumerate()
        .map(|(i, obs)| {
            hmm_viterbi(model, obs).map(|(_, lp)| lp).map_err(|e| match e {
                Error::ImpossibleObservation { .. } => Error::ImpossibleObservation { sequence: Some(i) },
                other => other,
            })
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin() -> HmmModel {
        HmmModel::new(2, 2, &[0.5, 0.5], &[0.9, 0.1, 0.2, 0.8], &[0.5, 0.5, 0.8, 0.2]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(HmmModel::new(2, 2, &[0.5, 0.6], &[1.0, 0.0, 0.0, 1.0], &[1.0, 0.0, 0.0, 1.0]).is_err());
        assert!(HmmModel::new(2, 2, &[0.5, 0.5], &[1.0, 0.0], &[1.0, 0.0, 0.0, 1.0]).is_err());
        assert!(HmmModel::new(1, 1, &[1.0], &[1.0], &[-0.0 + 1.0]).is_ok());
        assert!(HmmModel::new(2, 1, &[1.5, -0.5], &[1.0, 0.0, 0.0, 1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn identity_transitions_force_state_zero() {
        let m = HmmModel::new(2, 3, &[1.0, 0.0], &[1.0, 0.0, 0.0, 1.0], &[0.2, 0.3, 0.5, 0.6, 0.3, 0.1]).unwrap();
        let obs = [0, 2, 2, 1];
        let (path, lp) = hmm_viterbi(&m, &obs).unwrap();
        assert_eq!(path, vec![0; 4]);
        let expected = 0.2f64.ln() + 0.5f64.ln() + 0.5f64.ln() + 0.3f64.ln();
        assert!((lp - expected).abs() < 1e-12);
    }

    #[test]
    fn uniform_model_ties_to_state_zero() {
        let m = HmmModel::new(3, 2, &[1.0 / 3.0; 3], &[1.0 / 3.0; 9], &[0.5; 6]).unwrap();
        let (path, _) = hmm_viterbi(&m, &[0, 1, 1, 0, 1]).unwrap();
        assert_eq!(path, vec![0; 5]);
    }

    #[test]
    fn impossible_and_invalid_observations() {
        let m = HmmModel::new(2, 2, &[1.0, 0.0], &[1.0, 0.0, 0.0, 1.0], &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(hmm_viterbi(&m, &[0, 1]), Err(Error::ImpossibleObservation { sequence: None })));
        assert!(matches!(hmm_forward_backward(&m, &[1]), Err(Error::ImpossibleObservation { .. })));
        assert!(matches!(
            hmm_viterbi(&m, &[0, 2]),
            Err(Error::InvalidSymbol { symbol: 2, position: 1, .. })
        ));
        assert!(matches!(
            viterbi_training_step(&m, &[vec![0, 0], vec![0, 1]], 1e-3),
            Err(Error::ImpossibleObservation { sequence: Some(1) })
        ));
    }

    #[test]
    fn single_step_posterior() {
        let m = coin();
        let s = hmm_forward_backward(&m, &[1]).unwrap();
        let w = [0.5 * 0.5, 0.5 * 0.2];
        let z = w[0] + w[1];
        assert!((s.posterior(0)[0] - w[0] / z).abs() < 1e-12);
        assert!((s.log_likelihood - z.ln()).abs() < 1e-12);
    }

    #[test]
    fn posterior_argmax_can_differ_from_viterbi_path() {
        // start in A (0.4) or B (0.6); B splits evenly into C and D, A stays put
        let initial = [0.4, 0.6, 0.0, 0.0];
        #[rustfmt::skip]
        let transition = [
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.5, 0.5,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ];
        let m = HmmModel::new(4, 1, &initial, &transition, &[1.0; 4]).unwrap();
        let (path, _) = hmm_viterbi(&m, &[0, 0]).unwrap();
        assert_eq!(path, vec![0, 0]);
        let s = hmm_forward_backward(&m, &[0, 0]).unwrap();
        assert!(s.posterior(0)[1] > s.posterior(0)[0]);
    }

    #[test]
    fn training_fixed_point_of_deterministic_model() {
        // 0 -> 1 -> 0 ..., state i emits symbol i
        let m = HmmModel::new(2, 2, &[1.0, 0.0], &[0.0, 1.0, 1.0, 0.0], &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let data = vec![vec![0, 1, 0, 1, 0, 1], vec![0, 1, 0]];
        let step = viterbi_training_step(&m, &data, 1e-13).unwrap();
        for (a, b) in step.model.transition().iter().zip(m.transition()) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in step.model.emission().iter().zip(m.emission()) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((step.model.initial()[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn trained_rows_are_stochastic() {
        let data = vec![vec![0, 1, 1, 0, 0, 0, 1], vec![1, 1, 1, 1]];
        let step = viterbi_training_step(&coin(), &data, DEFAULT_SMOOTHING).unwrap();
        let t = step.model.transition();
        for row in t.chunks(2) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let m = coin();
        let back = HmmModel::from_json_str(&m.to_json_string()).unwrap();
        for (a, b) in back.transition().iter().zip(m.transition()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(HmmModel::from_json_str(r#"{"n_states": 1}"#).is_err());
        let bad = r#"{"n_states":1,"n_symbols":2,"initial":[1.0],"transition":[[1.0]],"emission":[[0.5,0.6]]}"#;
        assert!(matches!(HmmModel::from_json_str(bad), Err(Error::InvalidModel(_))));
    }
}
