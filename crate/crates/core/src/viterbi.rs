//! The Viterbi algorithm: add-compare-select over a trellis with traceback
//! survivor storage.
//!
//! Tie-breaking is fixed: at every add-compare-select the extension from the
//! lower-numbered predecessor state wins (then the lower input index), and
//! among end states the lower index wins.

use crate::error::{Error, Result};
use crate::metric::MetricSpec;
use crate::trellis::Trellis;

/// Where the decoded path must end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EndRule {
    /// The path must end in state 0; the caller has appended tail inputs.
    ToStateZero,
    /// The best end state wins.
    #[default]
    FreeEnd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Decided input indices, one per section.
    pub inputs: Vec<usize>,
    /// Sum of branch metrics along the decided path.
    pub final_cost: f64,
    pub end_state: usize,
}

impl DecodeResult {
    pub fn labels(&self, trellis: &Trellis) -> Vec<f64> {
        self.inputs
            .iter()
            .map(|&u| trellis.input_alphabet()[u])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoderOptions {
    /// Subtract the per-section minimum from all state metrics.
    pub renormalize: bool,
}

impl Default for DecoderOptions {
    fn default() -> Self {
        DecoderOptions { renormalize: true }
    }
}

/// Accumulated path metric. `u64` is used for Hamming, `f64` otherwise.
pub trait PathMetric: Copy + PartialOrd + std::fmt::Debug + Send + Sync + 'static {
    const ZERO: Self;
    /// Cost of an unreachable state.
    const UNREACHABLE: Self;
    fn from_branch(metric: f64) -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn to_f64(self) -> f64;
}

impl PathMetric for f64 {
    const ZERO: f64 = 0.0;
    const UNREACHABLE: f64 = f64::INFINITY;
    #[inline]
    fn from_branch(metric: f64) -> f64 {
        metric
    }
    #[inline]
    fn add(self, other: f64) -> f64 {
        self + other
    }
    #[inline]
    fn sub(self, other: f64) -> f64 {
        self - other
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl PathMetric for u64 {
    const ZERO: u64 = 0;
    const UNREACHABLE: u64 = u64::MAX;
    #[inline]
    fn from_branch(metric: f64) -> u64 {
        metric as u64
    }
    #[inline]
    fn add(self, other: u64) -> u64 {
        self.saturating_add(other)
    }
    #[inline]
    fn sub(self, other: u64) -> u64 {
        if self == u64::MAX {
            self
        } else {
            self - other
        }
    }
    fn to_f64(self) -> f64 {
        if self == u64::MAX {
            f64::INFINITY
        } else {
            self as f64
        }
    }
}

/// Per-section branch metrics, evaluated on distinct branch output vectors.
pub trait SectionMetrics {
    fn num_sections(&self) -> usize;
    fn metric(&self, section: usize, output: &[f64]) -> Result<f64>;
    /// Whether metrics are integers and may be accumulated exactly in `u64`.
    fn is_integer(&self) -> bool {
        false
    }
}

/// Observations scored with a [`MetricSpec`]; `observations` is the flat
/// concatenation of one vector of `outputs_per_branch` values per section.
#[derive(Debug, Clone, Copy)]
pub struct Observed<'a> {
    spec: &'a MetricSpec,
    observations: &'a [f64],
    width: usize,
}

impl<'a> Observed<'a> {
    pub fn new(trellis: &Trellis, spec: &'a MetricSpec, observations: &'a [f64]) -> Result<Self> {
        let width = trellis.outputs_per_branch();
        if observations.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !observations.len().is_multiple_of(width) {
            return Err(Error::LengthMismatch {
                expected: observations.len().div_ceil(width) * width,
                found: observations.len(),
            });
        }
        Ok(Observed {
            spec,
            observations,
            width,
        })
    }

    pub fn section(&self, t: usize) -> &'a [f64] {
        &self.observations[t * self.width..(t + 1) * self.width]
    }
}

impl SectionMetrics for Observed<'_> {
    fn num_sections(&self) -> usize {
        self.observations.len() / self.width
    }

    fn metric(&self, section: usize, output: &[f64]) -> Result<f64> {
        self.spec.branch_metric(output, self.section(section))
    }

    fn is_integer(&self) -> bool {
        self.spec.is_integer()
    }
}

/// Metrics given by a closure over (section, branch output).
pub struct FnMetrics<F> {
    sections: usize,
    f: F,
}

impl<F: Fn(usize, &[f64]) -> f64> FnMetrics<F> {
    pub fn new(sections: usize, f: F) -> Self {
        FnMetrics { sections, f }
    }
}

impl<F: Fn(usize, &[f64]) -> f64> SectionMetrics for FnMetrics<F> {
    fn num_sections(&self) -> usize {
        self.sections
    }

    fn metric(&self, section: usize, output: &[f64]) -> Result<f64> {
        Ok((self.f)(section, output))
    }
}

/// Branch metrics of one section, one entry per distinct branch output.
pub(crate) fn class_metrics<C: PathMetric>(
    trellis: &Trellis,
    metrics: &dyn SectionMetrics,
    section: usize,
    out: &mut Vec<C>,
) -> Result<()> {
    out.clear();
    for c in 0..trellis.num_output_classes() {
        out.push(C::from_branch(metrics.metric(section, trellis.class_output(c))?));
    }
    Ok(())
}

/// Survivor state of a running Viterbi recursion: one accumulated metric and
/// one path history (as traceback pointers) per trellis state.
#[derive(Debug, Clone)]
pub struct SurvivorMemory<C: PathMetric> {
    metrics: Vec<C>,
    scratch: Vec<C>,
    // decisions[row * S + s] = branch index of the survivor entering s
    decisions: Vec<u32>,
    first_row: usize,
    rows: usize,
    capacity: Option<usize>,
    num_states: usize,
    section: usize,
    renormalize: bool,
}

impl<C: PathMetric> SurvivorMemory<C> {
    /// Starts at the trellis initial state. `capacity` bounds the number of
    /// stored sections (streaming); `None` keeps the whole history.
    pub fn new(trellis: &Trellis, capacity: Option<usize>, renormalize: bool) -> Self {
        let s = trellis.num_states();
        let mut metrics = vec![C::UNREACHABLE; s];
        metrics[trellis.initial_state()] = C::ZERO;
        let decisions = match capacity {
            Some(rows) => vec![0; rows * s],
            None => Vec::new(),
        };
        SurvivorMemory {
            metrics,
            scratch: vec![C::UNREACHABLE; s],
            decisions,
            first_row: 0,
            rows: 0,
            capacity,
            num_states: s,
            section: 0,
            renormalize,
        }
    }

    /// Number of survivors held; always the trellis state count.
    pub fn survivor_count(&self) -> usize {
        self.metrics.len()
    }

    pub fn metrics(&self) -> &[C] {
        &self.metrics
    }

    /// Sections processed so far.
    pub fn section(&self) -> usize {
        self.section
    }

    /// Sections currently held in the path history.
    pub fn stored_sections(&self) -> usize {
        self.rows
    }

    fn row_slot(&self, row: usize) -> usize {
        match self.capacity {
            Some(cap) => (self.first_row + row) % cap,
            None => row,
        }
    }

    /// One add-compare-select step over every state. `branch_metrics` holds
    /// one metric per output class of the trellis.
    pub fn advance(&mut self, trellis: &Trellis, branch_metrics: &[C]) {
        let s_count = self.num_states;
        let slot = match self.capacity {
            Some(cap) => {
                assert!(self.rows < cap, "survivor memory full; drop the oldest section first");
                (self.first_row + self.rows) % cap
            }
            None => {
                self.decisions.resize(self.decisions.len() + s_count, 0);
                self.rows
            }
        };
        let row = &mut self.decisions[slot * s_count..(slot + 1) * s_count];
        for (s, (next, decision)) in self.scratch.iter_mut().zip(row.iter_mut()).enumerate() {
            let mut best = C::UNREACHABLE;
            let mut best_branch = u32::MAX;
            for &b in trellis.incoming(s) {
                let from = b / trellis.num_inputs();
                let cand = self.metrics[from].add(branch_metrics[trellis.output_class(b)]);
                if best_branch == u32::MAX || cand < best {
                    best = cand;
                    best_branch = b as u32;
                }
            }
            *next = best;
            *decision = best_branch;
        }
        std::mem::swap(&mut self.metrics, &mut self.scratch);
        if self.renormalize {
            let min = self.metrics.iter().copied().fold(C::UNREACHABLE, |a, b| if b < a { b } else { a });
            if min != C::UNREACHABLE {
                for m in &mut self.metrics {
                    *m = m.sub(min);
                }
            }
        }
        self.rows += 1;
        self.section += 1;
    }

    /// Survivor branch per state chosen by the latest [`advance`](Self::advance).
    pub fn last_decisions(&self) -> &[u32] {
        let slot = self.row_slot(self.rows - 1);
        &self.decisions[slot * self.num_states..(slot + 1) * self.num_states]
    }

    /// Survivor branch entering `state` in stored section `row` (0 = oldest).
    pub fn survivor_branch(&self, row: usize, state: usize) -> usize {
        self.decisions[self.row_slot(row) * self.num_states + state] as usize
    }

    /// Forgets the oldest stored section.
    pub fn drop_oldest(&mut self) {
        if self.rows == 0 {
            return;
        }
        if let Some(cap) = self.capacity {
            self.first_row = (self.first_row + 1) % cap;
        } else {
            self.decisions.drain(..self.num_states);
        }
        self.rows -= 1;
    }

    /// Lowest-index state with the smallest metric.
    pub fn best_state(&self) -> usize {
        let mut best = 0;
        for (s, m) in self.metrics.iter().enumerate() {
            if *m < self.metrics[best] {
                best = s;
            }
        }
        best
    }

    /// Walks survivor pointers back from `state` over every stored section,
    /// returning the branch indices oldest first.
    pub fn traceback(&self, trellis: &Trellis, state: usize) -> Vec<usize> {
        let mut branches = vec![0; self.rows];
        let mut s = state;
        for row in (0..self.rows).rev() {
            let slot = self.row_slot(row);
            let b = self.decisions[slot * self.num_states + s] as usize;
            branches[row] = b;
            s = b / trellis.num_inputs();
        }
        branches
    }

    /// Input of the oldest stored section on the survivor ending in `state`.
    pub(crate) fn oldest_input(&self, trellis: &Trellis, state: usize) -> usize {
        let mut s = state;
        let mut b = 0;
        for row in (0..self.rows).rev() {
            let slot = self.row_slot(row);
            b = self.decisions[slot * self.num_states + s] as usize;
            s = b / trellis.num_inputs();
        }
        b % trellis.num_inputs()
    }
}

/// Block Viterbi decoding of observations scored with `spec`.
pub fn viterbi_decode_block(
    trellis: &Trellis,
    observations: &[f64],
    spec: &MetricSpec,
    end: EndRule,
) -> Result<DecodeResult> {
    let observed = Observed::new(trellis, spec, observations)?;
    decode_with(trellis, &observed, end, DecoderOptions::default())
}

/// Block Viterbi decoding over arbitrary per-section metrics.
pub fn decode_with(
    trellis: &Trellis,
    metrics: &dyn SectionMetrics,
    end: EndRule,
    options: DecoderOptions,
) -> Result<DecodeResult> {
    if metrics.num_sections() == 0 {
        return Err(Error::EmptyInput);
    }
    if metrics.is_integer() {
        decode_generic::<u64>(trellis, metrics, end, options)
    } else {
        decode_generic::<f64>(trellis, metrics, end, options)
    }
}

fn decode_generic<C: PathMetric>(
    trellis: &Trellis,
    metrics: &dyn SectionMetrics,
    end: EndRule,
    options: DecoderOptions,
) -> Result<DecodeResult> {
    let mut memory = SurvivorMemory::<C>::new(trellis, None, options.renormalize);
    let mut bm = Vec::with_capacity(trellis.num_output_classes());
    for t in 0..metrics.num_sections() {
        class_metrics(trellis, metrics, t, &mut bm)?;
        memory.advance(trellis, &bm);
    }
    let end_state = match end {
        EndRule::ToStateZero => 0,
        EndRule::FreeEnd => memory.best_state(),
    };
    if memory.metrics()[end_state] == C::UNREACHABLE {
        return Err(Error::IndexOutOfRange(format!(
            "end state {end_state} is unreachable in {} sections",
            metrics.num_sections()
        )));
    }
    let branches = memory.traceback(trellis, end_state);
    path_result(trellis, metrics, &branches)
}

/// Builds a [`DecodeResult`] from a branch sequence, summing branch metrics
/// in section order.
pub(crate) fn path_result(
    trellis: &Trellis,
    metrics: &dyn SectionMetrics,
    branches: &[usize],
) -> Result<DecodeResult> {
    let mut cost = 0.0;
    for (t, &b) in branches.iter().enumerate() {
        cost += metrics.metric(t, trellis.branch(b).output)?;
    }
    Ok(DecodeResult {
        inputs: branches.iter().map(|&b| b % trellis.num_inputs()).collect(),
        final_cost: cost,
        end_state: branches
            .last()
            .map(|&b| trellis.branch(b).to)
            .unwrap_or(trellis.initial_state()),
    })
}
