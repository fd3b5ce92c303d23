use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

use super::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelSpec {
    /// `ebn0_db` may be `f64::INFINITY` for a noiseless channel.
    Awgn { ebn0_db: f64, rate: f64 },
    Bsc { p: f64 },
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelSpec::Awgn { ebn0_db, rate } => noise_sigma(ebn0_db, rate).map(|_| ()),
            ChannelSpec::Bsc { p } if (0.0..=0.5).contains(&p) => Ok(()),
            ChannelSpec::Bsc { p } => Err(Error::InvalidChannel(format!("crossover {p} outside [0, 0.5]"))),
        }
    }
}

/// Noise standard deviation for unit-energy antipodal symbols at `ebn0_db`
/// and code rate `rate`: sigma^2 = 1 / (2 R 10^(EbN0/10)).
pub fn noise_sigma(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::BadRate(rate));
    }
    if ebn0_db.is_nan() || ebn0_db == f64::NEG_INFINITY {
        return Err(Error::InvalidChannel(format!("Eb/N0 of {ebn0_db} dB")));
    }
    if ebn0_db == f64::INFINITY {
        return Ok(0.0);
    }
    Ok((1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

/// Adds zero-mean Gaussian noise of deviation `sigma` to `levels`, drawing
/// from `(seed, stream_id)`.
pub fn add_noise(levels: &mut [f64], sigma: f64, seed: u64, stream_id: u64) {
    if sigma == 0.0 {
        return;
    }
    let mut rng = stream_rng(seed, stream_id);
    for x in levels {
        let z: f64 = rng.sample(StandardNormal);
        *x += sigma * z;
    }
}

/// Antipodal mapping (0 -> +1, 1 -> -1) plus AWGN.
pub fn awgn_transmit(bits: &[u8], ebn0_db: f64, rate: f64, seed: u64, stream_id: u64) -> Result<Vec<f64>> {
    let sigma = noise_sigma(ebn0_db, rate)?;
    let mut out = bits
        .iter()
        .map(|&b| match b {
            0 => Ok(1.0),
            1 => Ok(-1.0),
            other => Err(Error::InvalidBit(other)),
        })
        .collect::<Result<Vec<f64>>>()?;
    add_noise(&mut out, sigma, seed, stream_id);
    Ok(out)
}

/// Flips each bit independently with probability `p`.
pub fn bsc_transmit(bits: &[u8], p: f64, seed: u64, stream_id: u64) -> Result<Vec<u8>> {
    ChannelSpec::Bsc { p }.validate()?;
    let mut rng = stream_rng(seed, stream_id);
    bits.iter()
        .map(|&b| {
            if b > 1 {
                return Err(Error::InvalidBit(b));
            }
            let flip = p > 0.0 && rng.random::<f64>() < p;
            Ok(b ^ flip as u8)
        })
        .collect()
}
