//! Branch metrics: the additive cost of explaining an observation vector with
//! a branch output vector.

use crate::error::{Error, Result};
use crate::sim::quantize::Quantizer;

/// How branch output symbols map onto signal levels for the euclidean metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LevelMap {
    /// Bit `b` is sent as level `1 - 2b` (0 -> +1, 1 -> -1).
    #[default]
    Antipodal,
    /// Outputs are already signal levels (ISI trellises).
    Identity,
}

impl LevelMap {
    #[inline]
    pub fn level(self, symbol: f64) -> f64 {
        match self {
            LevelMap::Antipodal => 1.0 - 2.0 * symbol,
            LevelMap::Identity => symbol,
        }
    }
}

/// Negative log-likelihood table indexed by (output symbol, quantized observation).
///
/// Costs are normalized on construction so that the smallest cost for every
/// observation value is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct NllTable {
    symbols: Vec<f64>,
    levels: usize,
    costs: Vec<f64>,
}

impl NllTable {
    /// `rows[i][k]` is the cost of observing level `k` when symbol `symbols[i]` was sent.
    pub fn new(symbols: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<NllTable> {
        if symbols.is_empty() || rows.len() != symbols.len() {
            return Err(Error::BadParams("one cost row per symbol is required".into()));
        }
        let levels = rows[0].len();
        if levels == 0 || rows.iter().any(|r| r.len() != levels) {
            return Err(Error::BadParams("cost rows must share a nonzero length".into()));
        }
        if rows.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::BadParams("table costs must be finite".into()));
        }
        let mut costs: Vec<f64> = rows.into_iter().flatten().collect();
        for k in 0..levels {
            let min = (0..symbols.len())
                .map(|i| costs[i * levels + k])
                .fold(f64::INFINITY, f64::min);
            for i in 0..symbols.len() {
                costs[i * levels + k] -= min;
            }
        }
        Ok(NllTable {
            symbols,
            levels,
            costs,
        })
    }

    /// Table for antipodal bits through AWGN of standard deviation `sigma`,
    /// observed through `quantizer`: cost = -ln P(bin | bit).
    pub fn gaussian(quantizer: &Quantizer, sigma: f64) -> Result<NllTable> {
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::BadParams(format!("noise sigma must be positive, got {sigma}")));
        }
        let rows = [0.0, 1.0]
            .iter()
            .map(|&bit| {
                let mean = LevelMap::Antipodal.level(bit);
                (0..quantizer.num_levels())
                    .map(|k| {
                        let (lo, hi) = quantizer.bin_edges(k);
                        let p = normal_cdf((hi - mean) / sigma) - normal_cdf((lo - mean) / sigma);
                        -p.max(f64::MIN_POSITIVE).ln()
                    })
                    .collect()
            })
            .collect();
        NllTable::new(vec![0.0, 1.0], rows)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn cost(&self, symbol: f64, observation: f64) -> Result<f64> {
        let miss = || Error::TableMiss {
            symbol,
            observation,
        };
        let row = self.symbols.iter().position(|&s| s == symbol).ok_or_else(miss)?;
        if observation.fract() != 0.0 || observation < 0.0 || observation >= self.levels as f64 {
            return Err(miss());
        }
        Ok(self.costs[row * self.levels + observation as usize])
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    /// Number of differing symbols; observations are hard symbols.
    Hamming,
    /// Squared distance between observations and mapped output levels.
    Euclidean(LevelMap),
    /// Table lookups on quantized observations.
    NllTable(NllTable),
}

impl MetricSpec {
    /// Hamming accumulates exactly in integers.
    pub fn is_integer(&self) -> bool {
        matches!(self, MetricSpec::Hamming)
    }

    pub fn branch_metric(&self, output: &[f64], observation: &[f64]) -> Result<f64> {
        if output.len() != observation.len() {
            return Err(Error::LengthMismatch {
                expected: output.len(),
                found: observation.len(),
            });
        }
        Ok(match self {
            MetricSpec::Hamming => output
                .iter()
                .zip(observation)
                .filter(|(a, b)| a != b)
                .count() as f64,
            MetricSpec::Euclidean(map) => output
                .iter()
                .zip(observation)
                .map(|(&s, &y)| {
                    let d = y - map.level(s);
                    d * d
                })
                .sum(),
            MetricSpec::NllTable(table) => {
                let mut total = 0.0;
                for (&s, &y) in output.iter().zip(observation) {
                    total += table.cost(s, y)?;
                }
                total
            }
        })
    }
}
