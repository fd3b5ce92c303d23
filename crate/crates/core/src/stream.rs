//! Forward-only Viterbi decoding with truncated traceback.
//!
//! Each survivor carries a path history of at most `depth + 1` sections.
//! Once more than `depth` sections have been pushed, every push releases the
//! input decided `depth` sections before the newest one, read off the
//! survivor of the currently best state.

use crate::error::{Error, Result};
use crate::metric::MetricSpec;
use crate::trellis::Trellis;
use crate::viterbi::{class_metrics, EndRule, PathMetric, SectionMetrics, SurvivorMemory};

/// Traceback depth of five constraint lengths.
pub fn default_depth(memory: usize) -> usize {
    5 * (memory + 1)
}

#[derive(Debug, Clone)]
enum Metrics {
    Integer(SurvivorMemory<u64>, Vec<u64>),
    Real(SurvivorMemory<f64>, Vec<f64>),
}

#[derive(Debug, Clone)]
struct Running {
    trellis: Trellis,
    spec: MetricSpec,
    depth: usize,
    metrics: Metrics,
}

#[derive(Debug, Clone, Default)]
enum Phase {
    #[default]
    Uninitialized,
    Running(Box<Running>),
    Flushed,
}

/// Streaming decoder. A default-constructed value must be [`init`](Self::init)ialized before use.
#[derive(Debug, Clone, Default)]
pub struct StreamDecoder {
    phase: Phase,
}

struct OneSection<'a> {
    spec: &'a MetricSpec,
    observation: &'a [f64],
}

impl SectionMetrics for OneSection<'_> {
    fn num_sections(&self) -> usize {
        1
    }

    fn metric(&self, _: usize, output: &[f64]) -> Result<f64> {
        self.spec.branch_metric(output, self.observation)
    }
}

impl StreamDecoder {
    pub fn new(trellis: &Trellis, spec: &MetricSpec, depth: usize) -> Result<StreamDecoder> {
        let mut d = StreamDecoder::default();
        d.init(trellis, spec, depth)?;
        Ok(d)
    }

    /// (Re)starts the decoder at the trellis initial state.
    pub fn init(&mut self, trellis: &Trellis, spec: &MetricSpec, depth: usize) -> Result<()> {
        if depth == 0 {
            return Err(Error::BadParams("traceback depth must be at least 1".into()));
        }
        let cap = Some(depth + 1);
        let metrics = if spec.is_integer() {
            Metrics::Integer(SurvivorMemory::new(trellis, cap, true), Vec::new())
        } else {
            Metrics::Real(SurvivorMemory::new(trellis, cap, true), Vec::new())
        };
        self.phase = Phase::Running(Box::new(Running {
            trellis: trellis.clone(),
            spec: spec.clone(),
            depth,
            metrics,
        }));
        Ok(())
    }

    /// Adds one section of observations; returns the input label decided
    /// `depth` sections back, once that far in.
    pub fn push(&mut self, observation: &[f64]) -> Result<Option<f64>> {
        let run = match &mut self.phase {
            Phase::Uninitialized => return Err(Error::NotInitialized),
            Phase::Flushed => return Err(Error::PushAfterFlush),
            Phase::Running(run) => run,
        };
        if observation.len() != run.trellis.outputs_per_branch() {
            return Err(Error::LengthMismatch {
                expected: run.trellis.outputs_per_branch(),
                found: observation.len(),
            });
        }
        let section = OneSection {
            spec: &run.spec,
            observation,
        };
        let decided = match &mut run.metrics {
            Metrics::Integer(mem, bm) => step(&run.trellis, mem, bm, &section, run.depth)?,
            Metrics::Real(mem, bm) => step(&run.trellis, mem, bm, &section, run.depth)?,
        };
        Ok(decided.map(|u| run.trellis.input_alphabet()[u]))
    }

    /// Final traceback from state 0 (`ToStateZero`) or the best state,
    /// releasing every pending decision.
    pub fn flush(&mut self, end: EndRule) -> Result<Vec<f64>> {
        let run = match std::mem::replace(&mut self.phase, Phase::Flushed) {
            Phase::Uninitialized => {
                self.phase = Phase::Uninitialized;
                return Err(Error::NotInitialized);
            }
            Phase::Flushed => return Err(Error::PushAfterFlush),
            Phase::Running(run) => run,
        };
        let branches = match &run.metrics {
            Metrics::Integer(mem, _) => final_branches(&run.trellis, mem, end),
            Metrics::Real(mem, _) => final_branches(&run.trellis, mem, end),
        };
        let alphabet = run.trellis.input_alphabet();
        Ok(branches
            .into_iter()
            .map(|b| alphabet[b % run.trellis.num_inputs()])
            .collect())
    }

    /// Accumulated metric of every survivor, one per trellis state.
    pub fn survivor_metrics(&self) -> Option<Vec<f64>> {
        match &self.phase {
            Phase::Running(run) => Some(match &run.metrics {
                Metrics::Integer(mem, _) => mem.metrics().iter().map(|m| m.to_f64()).collect(),
                Metrics::Real(mem, _) => mem.metrics().to_vec(),
            }),
            _ => None,
        }
    }

    /// Survivor inspection for the real-valued metric path.
    pub fn survivors(&self) -> Option<&SurvivorMemory<f64>> {
        match &self.phase {
            Phase::Running(run) => match &run.metrics {
                Metrics::Real(mem, _) => Some(mem),
                Metrics::Integer(..) => None,
            },
            _ => None,
        }
    }
}

fn step<C: PathMetric>(
    trellis: &Trellis,
    mem: &mut SurvivorMemory<C>,
    bm: &mut Vec<C>,
    section: &dyn SectionMetrics,
    depth: usize,
) -> Result<Option<usize>> {
    class_metrics(trellis, section, 0, bm)?;
    mem.advance(trellis, bm);
    if mem.stored_sections() > depth {
        let u = mem.oldest_input(trellis, mem.best_state());
        mem.drop_oldest();
        Ok(Some(u))
    } else {
        Ok(None)
    }
}

fn final_branches<C: PathMetric>(trellis: &Trellis, mem: &SurvivorMemory<C>, end: EndRule) -> Vec<usize> {
    let state = match end {
        EndRule::ToStateZero => 0,
        EndRule::FreeEnd => mem.best_state(),
    };
    mem.traceback(trellis, state)
}

/// Decodes a whole observation sequence through a [`StreamDecoder`].
pub fn stream_decode(
    trellis: &Trellis,
    spec: &MetricSpec,
    observations: &[f64],
    depth: usize,
    end: EndRule,
) -> Result<Vec<f64>> {
    let n = trellis.outputs_per_branch();
    if !observations.len().is_multiple_of(n) {
        return Err(Error::LengthMismatch {
            expected: observations.len().div_ceil(n) * n,
            found: observations.len(),
        });
    }
    let mut dec = StreamDecoder::new(trellis, spec, depth)?;
    let mut out = Vec::with_capacity(observations.len() / n);
    for obs in observations.chunks(n) {
        out.extend(dec.push(obs)?);
    }
    out.extend(dec.flush(end)?);
    Ok(out)
}
