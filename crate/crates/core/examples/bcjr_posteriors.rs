//! Per-bit posteriors of a short (7,5) codeword in Gaussian noise.

use trellis::sim::channel::{awgn_transmit, noise_sigma};
use trellis::{bcjr, BcjrOptions, ConvCode, EndRule, GaussianLikelihood, LevelMap, Termination};

fn main() -> trellis::Result<()> {
    let code = ConvCode::from_octal(2, &["7", "5"])?;
    let info = [1u8, 0, 1, 1, 0, 0, 1, 0];
    let y = awgn_transmit(&code.encode(&info, Termination::ZeroTail)?, 1.0, 0.5, 5, 0)?;
    let sigma = noise_sigma(1.0, 0.5)?;
    let lik = GaussianLikelihood::new(sigma * sigma, LevelMap::Antipodal)?;
    let opts = BcjrOptions { end: EndRule::ToStateZero, ..Default::default() };
    let post = bcjr(&code.trellis(), &y, &lik, None, opts)?;
    println!("log p(y) = {:.3}", post.log_likelihood);
    for (t, bit) in info.iter().enumerate() {
        let p = post.input(t);
        println!("bit {t}: sent {bit}  P(0)={:.4}  P(1)={:.4}", p[0], p[1]);
    }
    Ok(())
}
