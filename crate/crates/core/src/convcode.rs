//! Binary rate-1/n feed-forward convolutional codes.
//!
//! Generators are octal; the most significant bit of a generator of width
//! `m + 1` taps the current input, the least significant bit taps the input
//! `m` steps back. Output bit `j` of every step is the parity of generator `j`
//! ANDed with the window `(u_t, u_{t-1}, ..., u_{t-m})`, and output bits appear
//! in generator order.
//!
//! In the code trellis, state `s` holds the last `m` inputs with the most
//! recent one in bit 0, so the next state is `((s << 1) | u) mod 2^m`.

use std::fmt;
use std::path::Path;

use crate::config::{self, Entry};
use crate::error::{Error, Result};
use crate::trellis::Trellis;

/// Largest supported memory (2^16 trellis states).
pub const MAX_MEMORY: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Append `m` zero input bits so the encoder returns to state 0.
    ZeroTail,
    Unterminated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvCode {
    memory: usize,
    generators: Vec<u32>,
}

impl ConvCode {
    pub fn new(memory: usize, generators: Vec<u32>) -> Result<ConvCode> {
        if memory > MAX_MEMORY {
            return Err(Error::InvalidCode(format!(
                "memory {memory} exceeds the supported maximum {MAX_MEMORY}"
            )));
        }
        if generators.is_empty() {
            return Err(Error::InvalidCode("at least one generator is required".into()));
        }
        let width = memory + 1;
        for &g in &generators {
            if g >> width != 0 {
                return Err(Error::InvalidCode(format!(
                    "generator {g:o} is wider than {width} bits"
                )));
            }
        }
        if generators.iter().all(|&g| g >> memory & 1 == 0) {
            return Err(Error::InvalidCode(
                "no generator taps the current input".into(),
            ));
        }
        Ok(ConvCode { memory, generators })
    }

    /// Parses octal generator strings such as `["133", "171"]`.
    pub fn from_octal<S: AsRef<str>>(memory: usize, generators: &[S]) -> Result<ConvCode> {
        let parsed = generators
            .iter()
            .map(|g| parse_octal(g.as_ref()).map_err(Error::InvalidCode))
            .collect::<Result<Vec<_>>>()?;
        ConvCode::new(memory, parsed)
    }

    /// 16 states, rate 1/2, generators (23, 33).
    pub fn gsm() -> ConvCode {
        ConvCode::new(4, vec![0o23, 0o33]).unwrap()
    }

    /// 256 states, rate 1/3, generators (557, 663, 711).
    pub fn is95() -> ConvCode {
        ConvCode::new(8, vec![0o557, 0o663, 0o711]).unwrap()
    }

    /// 64 states, rate 1/2, generators (133, 171).
    pub fn nasa() -> ConvCode {
        ConvCode::new(6, vec![0o133, 0o171]).unwrap()
    }

    pub fn preset(name: &str) -> Option<ConvCode> {
        match name {
            "gsm" => Some(ConvCode::gsm()),
            "is95" => Some(ConvCode::is95()),
            "nasa" => Some(ConvCode::nasa()),
            _ => None,
        }
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn constraint_length(&self) -> usize {
        self.memory + 1
    }

    /// Number of output bits per input bit.
    pub fn n(&self) -> usize {
        self.generators.len()
    }

    pub fn num_states(&self) -> usize {
        1 << self.memory
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    fn step(&self, window: u32, out: &mut Vec<u8>) {
        for &g in &self.generators {
            out.push(((g & window).count_ones() & 1) as u8);
        }
    }

    pub fn encode(&self, info: &[u8], termination: Termination) -> Result<Vec<u8>> {
        if let Some(&b) = info.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidBit(b));
        }
        let tail = match termination {
            Termination::ZeroTail => self.memory,
            Termination::Unterminated => 0,
        };
        let m = self.memory;
        let mut out = Vec::with_capacity(self.n() * (info.len() + tail));
        // bit m holds u_t, bit 0 holds u_{t-m}
        let mut window = 0u32;
        for &u in info.iter().chain(std::iter::repeat_n(&0, tail)) {
            window = (window >> 1) | (u as u32) << m;
            self.step(window, &mut out);
        }
        Ok(out)
    }

    /// The code trellis: `2^m` states, binary inputs `{0, 1}`, `n` outputs per branch.
    pub fn trellis(&self) -> Trellis {
        let m = self.memory;
        let states = self.num_states();
        let mask = states - 1;
        let mut next = Vec::with_capacity(2 * states);
        let mut outputs = Vec::with_capacity(2 * states * self.n());
        let mut bits = Vec::with_capacity(self.n());
        for s in 0..states {
            // u_{t-k} sits at state bit k-1 and at window bit m-k
            let history = (1..=m).fold(0u32, |w, k| w | ((s as u32 >> (k - 1)) & 1) << (m - k));
            for u in 0..2u32 {
                bits.clear();
                self.step(history | u << m, &mut bits);
                outputs.extend(bits.iter().map(|&b| b as f64));
                next.push(((s << 1) | u as usize) & mask);
            }
        }
        Trellis::from_dense(states, vec![0.0, 1.0], self.n(), next, outputs)
    }

    /// Minimum output weight over nonzero paths that leave state 0 and first
    /// return to it within `search_depth` sections.
    pub fn free_distance(&self, search_depth: usize) -> Result<FreeDistance> {
        let minimum = 3 * (self.memory + 1);
        if search_depth < minimum {
            return Err(Error::DepthTooSmall {
                depth: search_depth,
                minimum,
            });
        }
        let trellis = self.trellis();
        let weight = |s: usize, u: usize| -> u64 {
            trellis.output(s, u).iter().filter(|&&b| b != 0.0).count() as u64
        };
        let states = trellis.num_states();
        const OPEN: u64 = u64::MAX;

        let mut best = OPEN;
        let mut dist = vec![OPEN; states];
        let first = trellis.next_state(0, 1);
        if first == 0 {
            best = weight(0, 1);
        } else {
            dist[first] = weight(0, 1);
        }
        let mut next = vec![OPEN; states];
        for _ in 1..search_depth {
            next.fill(OPEN);
            for s in 1..states {
                if dist[s] == OPEN {
                    continue;
                }
                for u in 0..2 {
                    let to = trellis.next_state(s, u);
                    let w = dist[s] + weight(s, u);
                    if to == 0 {
                        best = best.min(w);
                    } else if w < next[to] {
                        next[to] = w;
                    }
                }
            }
            std::mem::swap(&mut dist, &mut next);
        }
        // Weights never decrease along a path, so open paths at least as heavy
        // as the best merged one cannot improve it.
        let open_min = dist.iter().copied().min().unwrap_or(OPEN);
        Ok(FreeDistance {
            distance: best,
            exact: open_min >= best,
        })
    }

    /// True when all generators share a nontrivial polynomial factor.
    pub fn is_catastrophic(&self) -> bool {
        let polys: Vec<u64> = self
            .generators
            .iter()
            .map(|&g| reverse_bits(g as u64, self.memory + 1))
            .collect();
        let common = polys.iter().fold(0u64, |acc, &p| gf2_gcd(acc, p));
        common > 1
    }

    pub fn from_ini_str(text: &str) -> Result<ConvCode> {
        let entries = config::parse_ini(text)?;
        config::check_keys(&entries, "code", &["memory", "n", "generators_octal", "preset"])?;
        code_from_entries(&entries)
    }

    pub fn from_ini_file(path: impl AsRef<Path>) -> Result<ConvCode> {
        let path = path.as_ref();
        let text = config::read_file(path)?;
        ConvCode::from_ini_str(&text).map_err(|e| e.in_file(path))
    }

    pub fn to_ini_string(&self) -> String {
        let gens: Vec<String> = self.generators.iter().map(|g| format!("{g:o}")).collect();
        format!(
            "[code]\nmemory = {}\nn = {}\ngenerators_octal = {}\n",
            self.memory,
            self.n(),
            gens.join(", ")
        )
    }
}

impl fmt::Display for ConvCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators.iter().map(|g| format!("{g:o}")).collect();
        write!(f, "K={} rate 1/{} ({})", self.memory + 1, self.n(), gens.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeDistance {
    pub distance: u64,
    /// False when some path still open at the search depth is lighter than
    /// `distance`; the value is then only an upper bound.
    pub exact: bool,
}

fn parse_octal(s: &str) -> std::result::Result<u32, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty generator".into());
    }
    if let Some(c) = s.chars().find(|c| !('0'..='7').contains(c)) {
        return Err(format!("invalid octal digit `{c}` in generator `{s}`"));
    }
    u32::from_str_radix(s, 8).map_err(|e| format!("generator `{s}`: {e}"))
}

fn code_from_entries(entries: &[Entry]) -> Result<ConvCode> {
    let preset = match config::find(entries, "preset") {
        Some(e) => Some(ConvCode::preset(&e.value).ok_or_else(|| {
            Error::config(Some(e.line), format!("unknown preset `{}`", e.value))
        })?),
        None => None,
    };
    let memory = config::find(entries, "memory")
        .map(|e| {
            e.value
                .parse::<usize>()
                .map_err(|_| Error::config(Some(e.line), format!("invalid memory `{}`", e.value)))
                .map(|v| (v, e.line))
        })
        .transpose()?;
    let generators = config::find(entries, "generators_octal")
        .map(|e| {
            e.value
                .split(',')
                .map(|g| parse_octal(g).map_err(|msg| Error::config(Some(e.line), msg)))
                .collect::<Result<Vec<u32>>>()
                .map(|g| (g, e.line))
        })
        .transpose()?;
    let n = config::find(entries, "n")
        .map(|e| {
            e.value
                .parse::<usize>()
                .map_err(|_| Error::config(Some(e.line), format!("invalid n `{}`", e.value)))
                .map(|v| (v, e.line))
        })
        .transpose()?;

    let code = match (preset, memory, generators) {
        (Some(p), None, None) => p,
        (preset, Some((m, m_line)), Some((g, g_line))) => {
            let code = ConvCode::new(m, g).map_err(|e| Error::config(Some(g_line.max(m_line)), e.to_string()))?;
            if let Some(p) = preset {
                if p != code {
                    return Err(Error::config(Some(g_line), "generators disagree with preset"));
                }
            }
            code
        }
        (_, None, _) => return Err(Error::config(None, "missing key `memory`")),
        (_, _, None) => return Err(Error::config(None, "missing key `generators_octal`")),
    };
    if let Some((n, line)) = n {
        if n != code.n() {
            return Err(Error::config(
                Some(line),
                format!("n = {n} but {} generators given", code.n()),
            ));
        }
    }
    Ok(code)
}

fn reverse_bits(v: u64, width: usize) -> u64 {
    (0..width).fold(0, |acc, i| acc | ((v >> i) & 1) << (width - 1 - i))
}

fn gf2_mod(mut a: u64, b: u64) -> u64 {
    let db = 63 - b.leading_zeros();
    while a != 0 && 63 - a.leading_zeros() >= db {
        a ^= b << (63 - a.leading_zeros() - db);
    }
    a
}

fn gf2_gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let r = gf2_mod(a, b);
        a = b;
        b = r;
    }
    a
}
