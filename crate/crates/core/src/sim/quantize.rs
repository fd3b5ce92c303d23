use crate::error::{Error, Result};

pub const MAX_QUANTIZER_BITS: u32 = 16;

/// Uniform midrise quantizer with `2^bits` levels of width `step`:
/// `level = clamp(floor(s / step) + 2^(bits-1), 0, 2^bits - 1)`.
///
/// Level `2^(bits-1)` is the first bin at or above zero, so with one bit the
/// level is the sign (1 = nonnegative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer {
    bits: u32,
    step: f64,
}

impl Quantizer {
    pub fn new(bits: u32, step: f64) -> Result<Quantizer> {
        if bits == 0 || bits > MAX_QUANTIZER_BITS {
            return Err(Error::BadParams(format!("quantizer bits must be in 1..={MAX_QUANTIZER_BITS}, got {bits}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::BadParams(format!("quantizer step must be positive, got {step}")));
        }
        Ok(Quantizer { bits, step })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn num_levels(&self) -> usize {
        1 << self.bits
    }

    fn half(&self) -> i64 {
        1 << (self.bits - 1)
    }

    pub fn level(&self, sample: f64) -> Result<u32> {
        if sample.is_nan() {
            return Err(Error::BadParams("cannot quantize NaN".into()));
        }
        let top = self.num_levels() as f64 - 1.0;
        let raw = (sample / self.step).floor() + self.half() as f64;
        Ok(raw.clamp(0.0, top) as u32)
    }

    /// Half-open sample interval `[lo, hi)` mapped to `level`; the outermost
    /// bins extend to infinity.
    pub fn bin_edges(&self, level: usize) -> (f64, f64) {
        let k = level as i64 - self.half();
        let lo = if level == 0 { f64::NEG_INFINITY } else { k as f64 * self.step };
        let hi = if level + 1 >= self.num_levels() {
            f64::INFINITY
        } else {
            (k + 1) as f64 * self.step
        };
        (lo, hi)
    }
}

pub fn quantize(samples: &[f64], bits: u32, step: f64) -> Result<Vec<u32>> {
    let q = Quantizer::new(bits, step)?;
    samples.iter().map(|&s| q.level(s)).collect()
}
