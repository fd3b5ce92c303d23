use crate::error::{Error, Result};
use crate::metric::MetricSpec;
use crate::trellis::Trellis;
use crate::viterbi::{class_metrics, EndRule, Observed, PathMetric, SectionMetrics, SurvivorMemory};

#[derive(Debug, Clone, PartialEq)]
pub struct SoftDecision {
    /// Decided input indices; identical to the Viterbi decisions.
    pub decisions: Vec<usize>,
    /// Per section: the smallest metric gap to a competing path that
    /// disagrees there, or `cap` when no competitor within the window does.
    pub reliabilities: Vec<f64>,
    /// Reported for sections without a disagreeing competitor: the largest
    /// gap seen along the decided path plus one.
    pub cap: f64,
}

/// Soft-output Viterbi decoding with metric-difference reliabilities.
///
/// Every merge along the decided path, at boundary `j`, compares the survivor
/// with each discarded extension. The discarded path is traced back at most
/// `window` sections; wherever its input differs from the decision, that
/// section's reliability is lowered to the merge's metric difference.
pub fn sova(
    trellis: &Trellis,
    observations: &[f64],
    spec: &MetricSpec,
    window: usize,
    end: EndRule,
) -> Result<SoftDecision> {
    if window == 0 {
        return Err(Error::BadParams("SOVA window must be at least 1".into()));
    }
    let observed = Observed::new(trellis, spec, observations)?;
    if spec.is_integer() {
        sova_generic::<u64>(trellis, &observed, window, end)
    } else {
        sova_generic::<f64>(trellis, &observed, window, end)
    }
}

fn sova_generic<C: PathMetric>(
    trellis: &Trellis,
    metrics: &dyn SectionMetrics,
    window: usize,
    end: EndRule,
) -> Result<SoftDecision> {
    let sections = metrics.num_sections();
    let s_count = trellis.num_states();
    let branches = trellis.num_branches();
    let k = trellis.num_inputs();

    // Same recursion (and arithmetic) as the block decoder, plus the gap of
    // every incoming candidate to the survivor it lost against.
    let mut memory = SurvivorMemory::<C>::new(trellis, None, true);
    let mut bm: Vec<C> = Vec::new();
    let mut gaps = vec![f64::INFINITY; sections * branches];
    let mut prev: Vec<C> = memory.metrics().to_vec();
    for t in 0..sections {
        class_metrics(trellis, metrics, t, &mut bm)?;
        prev.copy_from_slice(memory.metrics());
        memory.advance(trellis, &bm);
        let chosen = memory.last_decisions();
        for s in 0..s_count {
            let winner = chosen[s] as usize;
            if winner == u32::MAX as usize {
                continue;
            }
            let best = prev[winner / k].add(bm[trellis.output_class(winner)]);
            for &b in trellis.incoming(s) {
                if b == winner {
                    continue;
                }
                let cand = prev[b / k].add(bm[trellis.output_class(b)]);
                if cand != C::UNREACHABLE && best != C::UNREACHABLE {
                    gaps[t * branches + b] = cand.to_f64() - best.to_f64();
                }
            }
        }
    }

    let end_state = match end {
        EndRule::ToStateZero => 0,
        EndRule::FreeEnd => memory.best_state(),
    };
    if memory.metrics()[end_state] == C::UNREACHABLE {
        return Err(Error::IndexOutOfRange(format!("end state {end_state} is unreachable")));
    }
    let path = memory.traceback(trellis, end_state);
    let decisions: Vec<usize> = path.iter().map(|&b| b % k).collect();
    let mut states = Vec::with_capacity(sections + 1);
    states.push(trellis.initial_state());
    states.extend(path.iter().map(|&b| trellis.branch(b).to));

    let mut reliabilities = vec![f64::INFINITY; sections];
    let mut largest: f64 = 0.0;
    for j in 1..=sections {
        let s = states[j];
        for &c in trellis.incoming(s) {
            if c == path[j - 1] {
                continue;
            }
            let gap = gaps[(j - 1) * branches + c];
            if !gap.is_finite() {
                continue;
            }
            largest = largest.max(gap);
            // walk the discarded path back until it rejoins the decided one
            let mut b = c;
            let mut t = j - 1;
            loop {
                if b % k != decisions[t] && gap < reliabilities[t] {
                    reliabilities[t] = gap;
                }
                let from = b / k;
                if t == 0 || j - t >= window || from == states[t] {
                    break;
                }
                t -= 1;
                b = memory.survivor_branch(t, from);
            }
        }
    }
    let cap = largest + 1.0;
    for r in &mut reliabilities {
        if !r.is_finite() {
            *r = cap;
        }
    }
    Ok(SoftDecision {
        decisions,
        reliabilities,
        cap,
    })
}
