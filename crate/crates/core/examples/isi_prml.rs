//! Class-4 partial response: MLSE versus the symbol-by-symbol slicer.

use trellis::sim::channel::add_noise;
use trellis::{mlse_detect, ternary_threshold_detect, IsiChannel};

fn main() -> trellis::Result<()> {
    let ch = IsiChannel::class4();
    println!("taps {:?}, {} states", ch.taps(), ch.trellis()?.num_states());
    let n = 20_000;
    let symbols: Vec<f64> = (0..n).map(|i: u64| if (i * 0x9E37_79B9 >> 7) & 1 == 0 { 1.0 } else { -1.0 }).collect();
    let clean = ch.apply_fir(&symbols, false)?;
    for sigma in [0.5, 0.6, 0.7] {
        let mut y = clean.clone();
        add_noise(&mut y, sigma, 9, 0);
        let ml = mlse_detect(&ch, &y, sigma * sigma)?.levels;
        let thr = ternary_threshold_detect(&y, ch.memory());
        let count = |d: &[f64]| d.iter().zip(&symbols).filter(|(a, b)| a != b).count();
        println!("sigma {sigma}: mlse {} errors, threshold {} errors", count(&ml), count(&thr));
    }
    Ok(())
}
