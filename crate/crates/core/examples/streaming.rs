//! Fixed-delay decoding: push one section at a time and collect decisions.

use trellis::sim::channel::awgn_transmit;
use trellis::{viterbi_decode_block, ConvCode, EndRule, LevelMap, MetricSpec, StreamDecoder, Termination};

fn main() -> trellis::Result<()> {
    let code = ConvCode::nasa();
    let t = code.trellis();
    let info: Vec<u8> = (0..2000u32).map(|i| (i.wrapping_mul(2654435761) >> 31) as u8).collect();
    let y = awgn_transmit(&code.encode(&info, Termination::ZeroTail)?, 4.0, 0.5, 11, 0)?;
    let spec = MetricSpec::Euclidean(LevelMap::Antipodal);

    for depth in [7, 14, 35] {
        let mut dec = StreamDecoder::new(&t, &spec, depth)?;
        let mut out = Vec::new();
        for section in y.chunks(2) {
            out.extend(dec.push(section)?);
        }
        out.extend(dec.flush(EndRule::ToStateZero)?);
        let block = viterbi_decode_block(&t, &y, &spec, EndRule::ToStateZero)?.labels(&t);
        let diff = out.iter().zip(&block).filter(|(a, b)| a != b).count();
        let errs = out.iter().zip(&info).filter(|(&a, &b)| a != b as f64).count();
        println!("depth {depth:2}: {errs} errors, {diff} decisions differ from block decoding");
    }
    Ok(())
}
