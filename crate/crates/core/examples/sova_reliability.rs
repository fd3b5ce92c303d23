//! SOVA decisions with reliabilities; errors tend to sit on small values.

use trellis::sim::channel::awgn_transmit;
use trellis::{sova, ConvCode, EndRule, LevelMap, MetricSpec, Termination};

fn main() -> trellis::Result<()> {
    let code = ConvCode::gsm();
    let info: Vec<u8> = (0..400).map(|i| ((i * 7 + i / 3) % 5 < 2) as u8).collect();
    let y = awgn_transmit(&code.encode(&info, Termination::ZeroTail)?, 1.5, 0.5, 21, 0)?;
    let spec = MetricSpec::Euclidean(LevelMap::Antipodal);
    let out = sova(&code.trellis(), &y, &spec, 25, EndRule::ToStateZero)?;

    let (mut wrong, mut right) = (Vec::new(), Vec::new());
    for (t, &b) in info.iter().enumerate() {
        let r = out.reliabilities[t];
        if out.decisions[t] == b as usize { right.push(r) } else { wrong.push(r) }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    println!("{} errors, mean reliability {:.2} (wrong) vs {:.2} (right), cap {:.2}",
        wrong.len(), mean(&wrong), mean(&right), out.cap);
    Ok(())
}
