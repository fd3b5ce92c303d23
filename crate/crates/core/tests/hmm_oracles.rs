mod common;

use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use trellis::hmm::{
    hmm_forward_backward, hmm_viterbi, total_best_path_log_joint, viterbi_training_step, HmmModel,
};
use trellis::Error;

fn stochastic_row(rng: &mut ChaCha8Rng, len: usize, sparse: bool) -> Vec<f64> {
    let mut row: Vec<f64> = (0..len)
        .map(|_| if sparse && rng.random::<f64>() < 0.3 { 0.0 } else { rng.random_range(0.01..1.0) })
        .collect();
    if row.iter().all(|&p| p == 0.0) {
        row[0] = 1.0;
    }
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= sum);
    // force an exact unit sum
    let rest: f64 = row[1..].iter().sum();
    if row[0] > 0.0 {
        row[0] = 1.0 - rest;
    }
    row
}

pub fn random_model(rng: &mut ChaCha8Rng, n: usize, m: usize, sparse: bool) -> HmmModel {
    let initial = stochastic_row(rng, n, sparse);
    let transition: Vec<f64> = (0..n).flat_map(|_| stochastic_row(rng, n, sparse)).collect();
    let emission: Vec<f64> = (0..n).flat_map(|_| stochastic_row(rng, m, sparse)).collect();
    HmmModel::new(n, m, &initial, &transition, &emission).unwrap()
}

fn sample(rng: &mut ChaCha8Rng, model: &HmmModel, len: usize) -> Vec<usize> {
    let draw = |rng: &mut ChaCha8Rng, p: &[f64]| {
        let mut x = rng.random::<f64>();
        for (i, &q) in p.iter().enumerate() {
            if x < q {
                return i;
            }
            x -= q;
        }
        p.len() - 1
    };
    let (n, m) = (model.n_states(), model.n_symbols());
    let (tr, em) = (model.transition(), model.emission());
    let mut s = draw(rng, &model.initial());
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(draw(rng, &em[s * m..(s + 1) * m]));
        s = draw(rng, &tr[s * n..(s + 1) * n]);
    }
    out
}

/// Every state path with its probability-domain joint probability.
fn enumerate(model: &HmmModel, obs: &[usize]) -> Vec<(Vec<usize>, f64)> {
    let n = model.n_states();
    let t = obs.len();
    (0..n.pow(t as u32))
        .map(|code| {
            let mut rest = code;
            let path: Vec<usize> = (0..t)
                .map(|_| {
                    let s = rest % n;
                    rest /= n;
                    s
                })
                .collect();
            let (ini, tr, em) = (model.initial(), model.transition(), model.emission());
            let m = model.n_symbols();
            let mut p = ini[path[0]] * em[path[0] * m + obs[0]];
            for i in 1..t {
                p *= tr[path[i - 1] * n + path[i]] * em[path[i] * m + obs[i]];
            }
            (path, p)
        })
        .collect()
}

#[test]
fn viterbi_and_likelihood_match_enumeration() {
    let mut rng = common::rng(31);
    for i in 0..100 {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(1..=4);
        let model = random_model(&mut rng, n, m, i % 3 == 0);
        let len = rng.random_range(1..=8);
        let obs = sample(&mut rng, &model, len);
        let paths = enumerate(&model, &obs);
        let max = paths.iter().map(|p| p.1).fold(0.0, f64::max);
        let sum: f64 = paths.iter().map(|p| p.1).sum();
        let (path, lp) = hmm_viterbi(&model, &obs).unwrap();
        assert!((lp - max.ln()).abs() < 1e-9);
        assert!((model.log_joint(&path, &obs) - lp).abs() < 1e-12);
        for (_, p) in &paths {
            if *p > 0.0 {
                assert!(lp >= p.ln() - 1e-12);
            }
        }
        let fb = hmm_forward_backward(&model, &obs).unwrap();
        assert!((fb.log_likelihood - sum.ln()).abs() < 1e-9);
        assert!(lp <= fb.log_likelihood + 1e-12);
        for t in 0..len {
            assert!((fb.posterior(t).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for s in 0..n {
                let marginal: f64 = paths.iter().filter(|p| p.0[t] == s).map(|p| p.1).sum::<f64>() / sum;
                assert!((fb.posterior(t)[s] - marginal).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn training_is_monotone_from_random_starts() {
    let mut rng = common::rng(32);
    let truth = random_model(&mut rng, 3, 4, false);
    let data: Vec<Vec<usize>> = (0..25).map(|_| sample(&mut rng, &truth, 30)).collect();
    for _ in 0..20 {
        let mut model = random_model(&mut rng, 3, 4, false);
        let mut previous = total_best_path_log_joint(&model, &data).unwrap();
        for _ in 0..10 {
            let step = viterbi_training_step(&model, &data, 1e-3).unwrap();
            assert!((step.total_log_joint - previous).abs() < 1e-9);
            model = step.model;
            let now = total_best_path_log_joint(&model, &data).unwrap();
            assert!(now >= previous - 1e-9, "{now} < {previous}");
            previous = now;
        }
    }
}

#[test]
fn training_reports_failing_sequence() {
    let model = HmmModel::new(2, 2, &[1.0, 0.0], &[1.0, 0.0, 0.0, 1.0], &[1.0, 0.0, 0.0, 1.0]).unwrap();
    let data = vec![vec![0, 0], vec![0], vec![1, 0]];
    assert!(matches!(
        viterbi_training_step(&model, &data, 1e-3),
        Err(Error::ImpossibleObservation { sequence: Some(2) })
    ));
    assert!(matches!(viterbi_training_step(&model, &[], 1e-3), Err(Error::EmptyInput)));
    assert!(viterbi_training_step(&model, &data[..1], 0.0).is_err());
}

#[test]
fn json_file_round_trip_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = common::rng(33);
    let model = random_model(&mut rng, 3, 2, false);
    let path = dir.path().join("model.json");
    std::fs::write(&path, model.to_json_string()).unwrap();
    let back = HmmModel::from_json_file(&path).unwrap();
    for (a, b) in back.transition().iter().zip(model.transition()) {
        assert!((a - b).abs() < 1e-15);
    }
    std::fs::write(&path, "{\n  \"n_states\": 1,\n  \"oops\"\n}").unwrap();
    match HmmModel::from_json_file(&path) {
        Err(Error::Config { line: Some(4), .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

proptest! {
    #[test]
    fn posteriors_normalized(seed in any::<u64>(), len in 1usize..20) {
        let mut rng = common::rng(seed);
        let model = random_model(&mut rng, 4, 3, false);
        let obs = sample(&mut rng, &model, len);
        let fb = hmm_forward_backward(&model, &obs).unwrap();
        for t in 0..len {
            prop_assert!((fb.posterior(t).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trained_models_are_valid(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let model = random_model(&mut rng, 3, 3, true);
        let data: Vec<Vec<usize>> = (0..5).map(|_| sample(&mut rng, &model, 12)).collect();
        let step = viterbi_training_step(&model, &data, 1e-3).unwrap();
        let (n, m) = (3, 3);
        prop_assert!((step.model.initial().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for row in step.model.transition().chunks(n) {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        for row in step.model.emission().chunks(m) {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
