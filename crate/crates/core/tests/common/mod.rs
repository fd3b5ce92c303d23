#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trellis::trellis::{trellis_from_table, Branch, Trellis};
use trellis::ConvCode;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.random::<bool>() as u8).collect()
}

pub fn antipodal(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| 1.0 - 2.0 * b as f64).collect()
}

/// Every rate-1/n code with the given memory, one per unordered generator
/// tuple, skipping all-zero generators.
pub fn all_rate_half_codes(memory: usize) -> Vec<ConvCode> {
    let top = 1u32 << (memory + 1);
    let mut out = Vec::new();
    for a in 1..top {
        for b in a..top {
            if let Ok(c) = ConvCode::new(memory, vec![a, b]) {
                out.push(c);
            }
        }
    }
    out
}

pub fn random_code(rng: &mut ChaCha8Rng, max_memory: usize, max_n: usize) -> ConvCode {
    loop {
        let m = rng.random_range(0..=max_memory);
        let n = rng.random_range(1..=max_n);
        let gens: Vec<u32> = (0..n).map(|_| rng.random_range(1..1u32 << (m + 1))).collect();
        if let Ok(c) = ConvCode::new(m, gens) {
            return c;
        }
    }
}

/// Random deterministic trellis with real-valued outputs.
pub fn random_trellis(rng: &mut ChaCha8Rng, max_states: usize, max_inputs: usize, max_n: usize) -> Trellis {
    let states = rng.random_range(1..=max_states);
    let k = rng.random_range(2..=max_inputs);
    let n = rng.random_range(1..=max_n);
    let alphabet: Vec<f64> = (0..k).map(|u| u as f64).collect();
    let mut table = Vec::new();
    for from in 0..states {
        for &input in &alphabet {
            table.push(Branch {
                from,
                input,
                output: (0..n).map(|_| rng.random_range(-2..=2) as f64).collect(),
                to: rng.random_range(0..states),
            });
        }
    }
    trellis_from_table(&table, states, &alphabet).unwrap()
}
