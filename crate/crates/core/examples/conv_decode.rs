//! Encode with the K=7 NASA code, flip a few bits, decode hard and soft.

use trellis::sim::channel::awgn_transmit;
use trellis::{viterbi_decode_block, ConvCode, EndRule, LevelMap, MetricSpec, Termination};

fn main() -> trellis::Result<()> {
    let code = ConvCode::nasa();
    let t = code.trellis();
    let info: Vec<u8> = b"trellis".iter().flat_map(|c| (0..8).rev().map(move |i| (c >> i) & 1)).collect();
    let coded = code.encode(&info, Termination::ZeroTail)?;

    let mut hard: Vec<f64> = coded.iter().map(|&b| b as f64).collect();
    for i in [3, 17, 40, 41, 90] {
        hard[i] = 1.0 - hard[i];
    }
    let res = viterbi_decode_block(&t, &hard, &MetricSpec::Hamming, EndRule::ToStateZero)?;
    let decoded = &res.inputs[..info.len()];
    println!("hard: {} channel errors corrected, path cost {}", 5, res.final_cost);
    assert!(decoded.iter().zip(&info).all(|(&a, &b)| a == b as usize));

    let y = awgn_transmit(&coded, 3.0, 0.5, 7, 0)?;
    let res = viterbi_decode_block(&t, &y, &MetricSpec::Euclidean(LevelMap::Antipodal), EndRule::ToStateZero)?;
    let errors = res.inputs[..info.len()].iter().zip(&info).filter(|(&a, &b)| a != b as usize).count();
    println!("soft at 3 dB: {errors} bit errors in {} bits", info.len());
    Ok(())
}
