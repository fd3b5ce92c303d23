use crate::error::{Error, Result};
use crate::metric::MetricSpec;
use crate::trellis::Trellis;
use crate::viterbi::{path_result, DecodeResult, EndRule, Observed, SectionMetrics};

#[derive(Debug, Clone, PartialEq)]
pub struct MinSumOutput {
    pub result: DecodeResult,
    num_inputs: usize,
    /// Per section and input index: the cost of the best complete path using
    /// that input there.
    min_marginals: Vec<f64>,
}

impl MinSumOutput {
    pub fn min_marginals(&self, section: usize) -> &[f64] {
        &self.min_marginals[section * self.num_inputs..(section + 1) * self.num_inputs]
    }
}

/// Two-way min-sum decoding; returns the same minimum-cost path as
/// [`viterbi_decode_block`](crate::viterbi::viterbi_decode_block).
pub fn min_sum(
    trellis: &Trellis,
    observations: &[f64],
    spec: &MetricSpec,
    end: EndRule,
) -> Result<DecodeResult> {
    let observed = Observed::new(trellis, spec, observations)?;
    Ok(min_sum_detailed(trellis, &observed, end)?.result)
}

pub fn min_sum_detailed(
    trellis: &Trellis,
    metrics: &dyn SectionMetrics,
    end: EndRule,
) -> Result<MinSumOutput> {
    let sections = metrics.num_sections();
    if sections == 0 {
        return Err(Error::EmptyInput);
    }
    let s_count = trellis.num_states();
    let k = trellis.num_inputs();
    let branches = trellis.num_branches();

    let mut bm = vec![0.0; sections * branches];
    let mut class = vec![0.0; trellis.num_output_classes()];
    for t in 0..sections {
        for (c, v) in class.iter_mut().enumerate() {
            *v = metrics.metric(t, trellis.class_output(c))?;
        }
        for b in 0..branches {
            bm[t * branches + b] = class[trellis.output_class(b)];
        }
    }

    let (alpha, beta) = rayon::join(
        || {
            let mut alpha = vec![f64::INFINITY; (sections + 1) * s_count];
            alpha[trellis.initial_state()] = 0.0;
            for t in 0..sections {
                for b in 0..branches {
                    let br = trellis.branch(b);
                    let cand = alpha[t * s_count + br.from] + bm[t * branches + b];
                    let slot = &mut alpha[(t + 1) * s_count + br.to];
                    if cand < *slot {
                        *slot = cand;
                    }
                }
            }
            alpha
        },
        || {
            let mut beta = vec![f64::INFINITY; (sections + 1) * s_count];
            match end {
                EndRule::FreeEnd => beta[sections * s_count..].fill(0.0),
                EndRule::ToStateZero => beta[sections * s_count] = 0.0,
            }
            for t in (0..sections).rev() {
                for b in 0..branches {
                    let br = trellis.branch(b);
                    let cand = bm[t * branches + b] + beta[(t + 1) * s_count + br.to];
                    let slot = &mut beta[t * s_count + br.from];
                    if cand < *slot {
                        *slot = cand;
                    }
                }
            }
            beta
        },
    );

    let mut min_marginals = vec![f64::INFINITY; sections * k];
    for t in 0..sections {
        for b in 0..branches {
            let br = trellis.branch(b);
            let v = alpha[t * s_count + br.from] + bm[t * branches + b] + beta[(t + 1) * s_count + br.to];
            let slot = &mut min_marginals[t * k + br.input];
            if v < *slot {
                *slot = v;
            }
        }
    }

    // Lowest end state on an optimal path, then the lowest-index optimal
    // predecessor at every merge: the Viterbi tie-break.
    let mut state = (0..s_count)
        .filter(|&s| beta[sections * s_count + s] == 0.0)
        .fold(None, |best: Option<usize>, s| match best {
            Some(b) if alpha[sections * s_count + b] <= alpha[sections * s_count + s] => Some(b),
            _ => Some(s),
        })
        .expect("at least one admissible end state");
    if alpha[sections * s_count + state] == f64::INFINITY {
        return Err(Error::IndexOutOfRange(format!(
            "no path of {sections} sections reaches the required end state"
        )));
    }
    let mut path = vec![0; sections];
    for t in (0..sections).rev() {
        let mut best = f64::INFINITY;
        let mut chosen = usize::MAX;
        for &b in trellis.incoming(state) {
            let cand = alpha[t * s_count + b / k] + bm[t * branches + b];
            if chosen == usize::MAX || cand < best {
                best = cand;
                chosen = b;
            }
        }
        path[t] = chosen;
        state = chosen / k;
    }

    Ok(MinSumOutput {
        result: path_result(trellis, metrics, &path)?,
        num_inputs: k,
        min_marginals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convcode::ConvCode;
    use crate::viterbi::{viterbi_decode_block, FnMetrics};

    #[test]
    fn single_section_picks_cheapest_branch() {
        let t = ConvCode::from_octal(2, &["7", "5"]).unwrap().trellis();
        let r = min_sum(&t, &[1.0, 1.0], &MetricSpec::Hamming, EndRule::FreeEnd).unwrap();
        assert_eq!(r.inputs, vec![1]);
        assert_eq!(r.final_cost, 0.0);
        // both branches cost 1: lowest input wins
        let r = min_sum(&t, &[0.0, 1.0], &MetricSpec::Hamming, EndRule::FreeEnd).unwrap();
        assert_eq!((r.inputs, r.final_cost), (vec![0], 1.0));
    }

    #[test]
    fn equal_metrics_give_all_zero_path() {
        let t = ConvCode::gsm().trellis();
        let flat = FnMetrics::new(9, |_, _| 1.0);
        let out = min_sum_detailed(&t, &flat, EndRule::FreeEnd).unwrap();
        assert_eq!(out.result.inputs, vec![0; 9]);
        assert_eq!(out.result.final_cost, 9.0);
        assert!(out.min_marginals(4).iter().all(|&m| m == 9.0));
    }

    #[test]
    fn matches_viterbi_on_a_noisy_word() {
        let t = ConvCode::from_octal(3, &["15", "17"]).unwrap().trellis();
        let rx: Vec<f64> = (0..30).map(|i| (((i * 13 + 5) % 7) < 3) as u8 as f64).collect();
        for end in [EndRule::FreeEnd, EndRule::ToStateZero] {
            let a = viterbi_decode_block(&t, &rx, &MetricSpec::Hamming, end).unwrap();
            let b = min_sum(&t, &rx, &MetricSpec::Hamming, end).unwrap();
            assert_eq!(a, b);
        }
    }
}
