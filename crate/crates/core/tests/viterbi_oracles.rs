mod common;

use proptest::prelude::*;
use rand::Rng;
use trellis::convcode::{ConvCode, Termination};
use trellis::metric::{LevelMap, MetricSpec};
use trellis::stream::{default_depth, stream_decode, StreamDecoder};
use trellis::trellis::{enumerate_paths_with_cost, Trellis};
use trellis::viterbi::{decode_with, viterbi_decode_block, DecoderOptions, EndRule, FnMetrics, Observed};
use trellis::Error;

#[test]
fn branch_metric_examples() {
    assert_eq!(MetricSpec::Hamming.branch_metric(&[0.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
    assert_eq!(MetricSpec::Hamming.branch_metric(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
    let e = MetricSpec::Euclidean(LevelMap::Antipodal)
        .branch_metric(&[1.0, 1.0], &[-0.9, -1.1])
        .unwrap();
    assert!((e - 0.02).abs() < 1e-15);
    assert!(matches!(
        MetricSpec::Hamming.branch_metric(&[0.0, 0.0], &[0.0]),
        Err(Error::LengthMismatch { .. })
    ));
}

#[test]
fn block_decode_examples() {
    let c = ConvCode::from_octal(2, &["7", "5"]).unwrap();
    let t = c.trellis();
    let tx: Vec<f64> = c
        .encode(&[1, 0, 1, 1, 0], Termination::ZeroTail)
        .unwrap()
        .iter()
        .map(|&b| b as f64)
        .collect();
    let r = viterbi_decode_block(&t, &tx, &MetricSpec::Hamming, EndRule::ToStateZero).unwrap();
    assert_eq!((r.inputs, r.final_cost), (vec![1, 0, 1, 1, 0, 0, 0], 0.0));

    let rx = [0.0, 1.0, 1.0, 0.0, 1.0, 1.0];
    let r = viterbi_decode_block(&t, &rx, &MetricSpec::Hamming, EndRule::FreeEnd).unwrap();
    assert_eq!((r.inputs, r.final_cost), (vec![1, 0, 0], 1.0));

    let r = viterbi_decode_block(&t, &[0.0; 6], &MetricSpec::Hamming, EndRule::ToStateZero).unwrap();
    assert_eq!((r.inputs, r.final_cost), (vec![0, 0, 0], 0.0));

    assert!(matches!(
        viterbi_decode_block(&t, &[], &MetricSpec::Hamming, EndRule::FreeEnd),
        Err(Error::EmptyInput)
    ));
    assert!(matches!(
        viterbi_decode_block(&t, &[0.0; 3], &MetricSpec::Hamming, EndRule::FreeEnd),
        Err(Error::LengthMismatch { .. })
    ));
}

/// Minimum enumerated cost, and the minimizer when it is unique.
pub fn brute_force(
    t: &Trellis,
    spec: &MetricSpec,
    obs: &[f64],
    end: EndRule,
) -> (f64, Option<Vec<usize>>) {
    let n = t.outputs_per_branch();
    let sections = obs.len() / n;
    let end_state = match end {
        EndRule::ToStateZero => Some(0),
        EndRule::FreeEnd => None,
    };
    let paths = enumerate_paths_with_cost(t, sections, 0, end_state, |sec, b| {
        spec.branch_metric(b.output, &obs[sec * n..(sec + 1) * n]).unwrap()
    })
    .unwrap();
    let min = paths.iter().map(|p| p.cost).fold(f64::INFINITY, f64::min);
    let winners: Vec<_> = paths.iter().filter(|p| p.cost == min).collect();
    let unique = (winners.len() == 1).then(|| winners[0].inputs.clone());
    (min, unique)
}

fn noisy_observation(rng: &mut impl Rng, code: &ConvCode, info_bits: usize, soft: bool) -> (Vec<f64>, MetricSpec) {
    let info: Vec<u8> = (0..info_bits).map(|_| rng.random::<bool>() as u8).collect();
    let coded = code.encode(&info, Termination::ZeroTail).unwrap();
    if soft {
        let obs = coded
            .iter()
            .map(|&b| 1.0 - 2.0 * b as f64 + rng.random_range(-1.5..1.5))
            .collect();
        (obs, MetricSpec::Euclidean(LevelMap::Antipodal))
    } else {
        let obs = coded
            .iter()
            .map(|&b| (b ^ (rng.random::<f64>() < 0.15) as u8) as f64)
            .collect();
        (obs, MetricSpec::Hamming)
    }
}

#[test]
fn decoder_matches_enumeration_on_small_codes() {
    let mut rng = common::rng(41);
    for m in 0..=2 {
        for code in common::all_rate_half_codes(m).into_iter().step_by(3) {
            let t = code.trellis();
            for trial in 0..20 {
                let soft = trial % 2 == 1;
                let (obs, spec) = noisy_observation(&mut rng, &code, 6, soft);
                for end in [EndRule::ToStateZero, EndRule::FreeEnd] {
                    let r = viterbi_decode_block(&t, &obs, &spec, end).unwrap();
                    let (min, unique) = brute_force(&t, &spec, &obs, end);
                    assert_eq!(r.final_cost, min, "{code} {end:?}");
                    if let Some(u) = unique {
                        assert_eq!(r.inputs, u);
                    }
                }
            }
        }
    }
}

#[test]
fn renormalization_does_not_change_results() {
    let mut rng = common::rng(7);
    let code = ConvCode::gsm();
    let t = code.trellis();
    for soft in [false, true] {
        for _ in 0..50 {
            let (obs, spec) = noisy_observation(&mut rng, &code, 40, soft);
            let observed = Observed::new(&t, &spec, &obs).unwrap();
            let a = decode_with(&t, &observed, EndRule::FreeEnd, DecoderOptions { renormalize: true }).unwrap();
            let b = decode_with(&t, &observed, EndRule::FreeEnd, DecoderOptions { renormalize: false }).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn survivors_stay_complete_and_normalized() {
    let mut rng = common::rng(8);
    let code = ConvCode::from_octal(3, &["15", "17"]).unwrap();
    let t = code.trellis();
    for soft in [false, true] {
        let (obs, spec) = noisy_observation(&mut rng, &code, 30, soft);
        let mut dec = StreamDecoder::new(&t, &spec, 12).unwrap();
        for chunk in obs.chunks(2) {
            dec.push(chunk).unwrap();
            let metrics = dec.survivor_metrics().unwrap();
            assert_eq!(metrics.len(), t.num_states());
            let min = metrics.iter().copied().fold(f64::INFINITY, f64::min);
            assert_eq!(min, 0.0);
        }
    }
}

#[test]
fn streaming_lifecycle() {
    let t = ConvCode::from_octal(2, &["7", "5"]).unwrap().trellis();
    let mut fresh = StreamDecoder::default();
    assert!(matches!(fresh.push(&[0.0, 0.0]), Err(Error::NotInitialized)));
    let mut dec = StreamDecoder::new(&t, &MetricSpec::Hamming, 4).unwrap();
    let mut emitted = 0;
    for _ in 0..9 {
        emitted += dec.push(&[0.0, 0.0]).unwrap().is_some() as usize;
    }
    emitted += dec.flush(EndRule::FreeEnd).unwrap().len();
    assert_eq!(emitted, 9);
    assert!(matches!(dec.push(&[0.0, 0.0]), Err(Error::PushAfterFlush)));
}

#[test]
fn streaming_noiseless_and_long_depth() {
    let mut rng = common::rng(9);
    for code in [ConvCode::from_octal(2, &["7", "5"]).unwrap(), ConvCode::gsm(), ConvCode::nasa()] {
        let t = code.trellis();
        for _ in 0..30 {
            let info = common::random_bits(&mut rng, 60);
            let coded = code.encode(&info, Termination::ZeroTail).unwrap();
            let obs: Vec<f64> = coded.iter().map(|&b| b as f64).collect();
            let block = viterbi_decode_block(&t, &obs, &MetricSpec::Hamming, EndRule::ToStateZero).unwrap();
            let labels = stream_decode(&t, &MetricSpec::Hamming, &obs, default_depth(code.memory()), EndRule::ToStateZero)
                .unwrap();
            assert_eq!(labels, block.labels(&t));
            let sent: Vec<f64> = info.iter().map(|&b| b as f64).collect();
            assert_eq!(&labels[..info.len()], &sent[..]);

            // depth beyond the block: identical to block decoding even with noise
            let (noisy, spec) = noisy_observation(&mut rng, &code, 20, true);
            let sections = noisy.len() / 2;
            let block = viterbi_decode_block(&t, &noisy, &spec, EndRule::FreeEnd).unwrap();
            let streamed = stream_decode(&t, &spec, &noisy, sections, EndRule::FreeEnd).unwrap();
            assert_eq!(streamed, block.labels(&t));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constant_offset_shifts_cost(seed in any::<u64>(), offset in 0u32..16) {
        let mut rng = common::rng(seed);
        let code = common::random_code(&mut rng, 3, 2);
        let t = code.trellis();
        let sections = 12;
        let n = code.n();
        // dyadic observations keep every sum exact
        let obs: Vec<f64> = (0..sections * n).map(|_| rng.random_range(-8..=8) as f64 / 4.0).collect();
        let c = offset as f64 / 2.0;
        let base = FnMetrics::new(sections, |s, out: &[f64]| {
            MetricSpec::Euclidean(LevelMap::Antipodal).branch_metric(out, &obs[s * n..(s + 1) * n]).unwrap()
        });
        let shifted = FnMetrics::new(sections, |s, out: &[f64]| {
            c + MetricSpec::Euclidean(LevelMap::Antipodal).branch_metric(out, &obs[s * n..(s + 1) * n]).unwrap()
        });
        let a = decode_with(&t, &base, EndRule::FreeEnd, DecoderOptions::default()).unwrap();
        let b = decode_with(&t, &shifted, EndRule::FreeEnd, DecoderOptions::default()).unwrap();
        prop_assert_eq!(&a.inputs, &b.inputs);
        prop_assert_eq!(a.final_cost + c * sections as f64, b.final_cost);
    }

    #[test]
    fn final_cost_is_path_sum(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let code = common::random_code(&mut rng, 4, 3);
        let t = code.trellis();
        let (obs, spec) = noisy_observation(&mut rng, &code, 15, seed % 2 == 0);
        let r = viterbi_decode_block(&t, &obs, &spec, EndRule::FreeEnd).unwrap();
        let n = code.n();
        let mut s = 0;
        let mut sum = 0.0;
        for (sec, &u) in r.inputs.iter().enumerate() {
            sum += spec.branch_metric(t.output(s, u), &obs[sec * n..(sec + 1) * n]).unwrap();
            s = t.next_state(s, u);
        }
        prop_assert_eq!(sum, r.final_cost);
        prop_assert_eq!(s, r.end_state);
    }

    #[test]
    fn random_trellis_decoding_is_optimal(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let t = common::random_trellis(&mut rng, 6, 3, 2);
        let sections = rng.random_range(1..=6);
        let obs: Vec<f64> = (0..sections * t.outputs_per_branch()).map(|_| rng.random_range(-2.5..2.5)).collect();
        let spec = MetricSpec::Euclidean(LevelMap::Identity);
        let r = viterbi_decode_block(&t, &obs, &spec, EndRule::FreeEnd).unwrap();
        let (min, unique) = brute_force(&t, &spec, &obs, EndRule::FreeEnd);
        prop_assert_eq!(r.final_cost, min);
        if let Some(u) = unique {
            prop_assert_eq!(r.inputs, u);
        }
    }
}
