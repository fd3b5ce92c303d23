//! Time-invariant trellis model shared by every detector in the crate.
//!
//! States are dense indices `0..num_states`. Inputs are referred to by their
//! index into the trellis input alphabet; the alphabet itself carries the
//! labels (bits `0`/`1` for code trellises, PAM levels for ISI trellises).
//! Branch `b = state * |alphabet| + input` leaves `state` under `input`.
//!
//! [`enumerate_paths`] walks every input sequence of a given length and is the
//! brute-force maximum-likelihood reference the recursive detectors are
//! checked against.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Upper bound on the number of paths [`enumerate_paths`] will produce.
pub const ENUMERATION_GUARD: u64 = 1 << 24;

/// One row of an explicit branch table.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub from: usize,
    /// Input label; must be a member of the alphabet passed alongside the table.
    pub input: f64,
    pub output: Vec<f64>,
    pub to: usize,
}

/// Borrowed view of a branch inside a [`Trellis`].
#[derive(Debug, Clone, Copy)]
pub struct BranchRef<'a> {
    pub index: usize,
    pub from: usize,
    pub input: usize,
    pub to: usize,
    pub output: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct Trellis {
    num_states: usize,
    input_alphabet: Vec<f64>,
    outputs_per_branch: usize,
    initial_state: usize,
    next_state: Vec<usize>,
    outputs: Vec<f64>,
    // Incoming branches per destination state, ascending by (from, input).
    incoming_offsets: Vec<usize>,
    incoming: Vec<usize>,
    // Branches sharing an identical output vector share a class.
    output_class: Vec<usize>,
    class_outputs: Vec<f64>,
}

impl Trellis {
    /// Builds a trellis from dense next-state and output tables indexed by
    /// branch (`state * |alphabet| + input`).
    pub(crate) fn from_dense(
        num_states: usize,
        input_alphabet: Vec<f64>,
        outputs_per_branch: usize,
        next_state: Vec<usize>,
        outputs: Vec<f64>,
    ) -> Trellis {
        let branches = next_state.len();
        debug_assert_eq!(branches, num_states * input_alphabet.len());
        debug_assert_eq!(outputs.len(), branches * outputs_per_branch);

        let mut counts = vec![0usize; num_states + 1];
        for &to in &next_state {
            counts[to + 1] += 1;
        }
        for s in 0..num_states {
            counts[s + 1] += counts[s];
        }
        let incoming_offsets = counts.clone();
        let mut fill = counts;
        let mut incoming = vec![0usize; branches];
        for (b, &to) in next_state.iter().enumerate() {
            incoming[fill[to]] = b;
            fill[to] += 1;
        }

        let mut classes: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut output_class = Vec::with_capacity(branches);
        let mut class_outputs = Vec::new();
        for b in 0..branches {
            let out = &outputs[b * outputs_per_branch..(b + 1) * outputs_per_branch];
            let key: Vec<u64> = out.iter().map(|v| v.to_bits()).collect();
            let next = classes.len();
            let class = *classes.entry(key).or_insert_with(|| {
                class_outputs.extend_from_slice(out);
                next
            });
            output_class.push(class);
        }

        Trellis {
            num_states,
            input_alphabet,
            outputs_per_branch,
            initial_state: 0,
            next_state,
            outputs,
            incoming_offsets,
            incoming,
            output_class,
            class_outputs,
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn input_alphabet(&self) -> &[f64] {
        &self.input_alphabet
    }

    pub fn num_inputs(&self) -> usize {
        self.input_alphabet.len()
    }

    pub fn outputs_per_branch(&self) -> usize {
        self.outputs_per_branch
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn num_branches(&self) -> usize {
        self.next_state.len()
    }

    pub fn branch_index(&self, state: usize, input: usize) -> usize {
        state * self.input_alphabet.len() + input
    }

    pub fn branch(&self, index: usize) -> BranchRef<'_> {
        let k = self.input_alphabet.len();
        let n = self.outputs_per_branch;
        BranchRef {
            index,
            from: index / k,
            input: index % k,
            to: self.next_state[index],
            output: &self.outputs[index * n..(index + 1) * n],
        }
    }

    pub fn next_state(&self, state: usize, input: usize) -> usize {
        self.next_state[self.branch_index(state, input)]
    }

    pub fn output(&self, state: usize, input: usize) -> &[f64] {
        self.branch(self.branch_index(state, input)).output
    }

    pub fn branches(&self) -> impl Iterator<Item = BranchRef<'_>> + '_ {
        (0..self.num_branches()).map(move |b| self.branch(b))
    }

    /// Branch indices entering `state`, ordered by predecessor state then input.
    pub fn incoming(&self, state: usize) -> &[usize] {
        &self.incoming[self.incoming_offsets[state]..self.incoming_offsets[state + 1]]
    }

    pub(crate) fn output_class(&self, branch: usize) -> usize {
        self.output_class[branch]
    }

    pub(crate) fn num_output_classes(&self) -> usize {
        self.class_outputs.len() / self.outputs_per_branch.max(1)
    }

    pub(crate) fn class_output(&self, class: usize) -> &[f64] {
        let n = self.outputs_per_branch;
        &self.class_outputs[class * n..(class + 1) * n]
    }

    /// Index of `label` in the input alphabet.
    pub fn input_index(&self, label: f64) -> Option<usize> {
        self.input_alphabet.iter().position(|&l| l == label)
    }

    /// Follows the path driven by `inputs` from `start`, returning the
    /// concatenated branch outputs and the end state.
    pub fn drive(&self, start: usize, inputs: &[usize]) -> Result<(Vec<f64>, usize)> {
        if start >= self.num_states {
            return Err(Error::IndexOutOfRange(format!("start state {start}")));
        }
        let mut state = start;
        let mut outputs = Vec::with_capacity(inputs.len() * self.outputs_per_branch);
        for &u in inputs {
            if u >= self.num_inputs() {
                return Err(Error::IndexOutOfRange(format!("input index {u}")));
            }
            let b = self.branch(self.branch_index(state, u));
            outputs.extend_from_slice(b.output);
            state = b.to;
        }
        Ok((outputs, state))
    }
}

/// Validates an explicit branch table and builds the trellis.
///
/// Each `(state, input)` pair must be covered exactly once. All output vectors
/// must share one length, which becomes `outputs_per_branch`.
pub fn trellis_from_table(
    table: &[Branch],
    num_states: usize,
    input_alphabet: &[f64],
) -> Result<Trellis> {
    if num_states == 0 {
        return Err(Error::IndexOutOfRange("trellis needs at least one state".into()));
    }
    if input_alphabet.is_empty() {
        return Err(Error::IndexOutOfRange("input alphabet is empty".into()));
    }
    for (i, a) in input_alphabet.iter().enumerate() {
        if input_alphabet[..i].contains(a) {
            return Err(Error::IndexOutOfRange(format!("duplicate alphabet label {a}")));
        }
    }
    let k = input_alphabet.len();
    let n = table.first().map(|b| b.output.len()).unwrap_or(0);
    if n == 0 {
        return Err(Error::MissingBranch { state: 0, input: 0 });
    }

    let mut next_state = vec![usize::MAX; num_states * k];
    let mut outputs = vec![0.0; num_states * k * n];
    for row in table {
        if row.from >= num_states {
            return Err(Error::IndexOutOfRange(format!("from_state {}", row.from)));
        }
        if row.to >= num_states {
            return Err(Error::IndexOutOfRange(format!("to_state {}", row.to)));
        }
        let input = input_alphabet
            .iter()
            .position(|&a| a == row.input)
            .ok_or_else(|| Error::IndexOutOfRange(format!("input label {}", row.input)))?;
        if row.output.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: row.output.len(),
            });
        }
        let b = row.from * k + input;
        if next_state[b] != usize::MAX {
            return Err(Error::DuplicateBranch {
                state: row.from,
                input,
            });
        }
        next_state[b] = row.to;
        outputs[b * n..(b + 1) * n].copy_from_slice(&row.output);
    }
    if let Some(b) = next_state.iter().position(|&s| s == usize::MAX) {
        return Err(Error::MissingBranch {
            state: b / k,
            input: b % k,
        });
    }
    Ok(Trellis::from_dense(
        num_states,
        input_alphabet.to_vec(),
        n,
        next_state,
        outputs,
    ))
}

/// One complete path through a trellis.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    /// Input indices, one per section.
    pub inputs: Vec<usize>,
    pub outputs: Vec<f64>,
    pub end_state: usize,
    pub cost: f64,
}

impl PathRecord {
    pub fn labels(&self, trellis: &Trellis) -> Vec<f64> {
        self.inputs
            .iter()
            .map(|&u| trellis.input_alphabet()[u])
            .collect()
    }
}

/// All paths of `length` sections from `start`, optionally restricted to those
/// ending in `end`, in lexicographic order of their input sequences.
pub fn enumerate_paths(
    trellis: &Trellis,
    length: usize,
    start: usize,
    end: Option<usize>,
) -> Result<Vec<PathRecord>> {
    enumerate_paths_with_cost(trellis, length, start, end, |_, _| 0.0)
}

/// Like [`enumerate_paths`], accumulating `cost(section, branch)` along each
/// path in section order.
pub fn enumerate_paths_with_cost<F>(
    trellis: &Trellis,
    length: usize,
    start: usize,
    end: Option<usize>,
    mut cost: F,
) -> Result<Vec<PathRecord>>
where
    F: FnMut(usize, BranchRef<'_>) -> f64,
{
    let k = trellis.num_inputs();
    let total = (k as u64).checked_pow(length as u32);
    if total.is_none_or(|t| t > ENUMERATION_GUARD) {
        return Err(Error::TooLarge {
            length,
            alphabet: k,
        });
    }
    if start >= trellis.num_states() {
        return Err(Error::IndexOutOfRange(format!("start state {start}")));
    }
    if let Some(e) = end {
        if e >= trellis.num_states() {
            return Err(Error::IndexOutOfRange(format!("end state {e}")));
        }
    }

    let n = trellis.outputs_per_branch();
    let mut paths = Vec::new();
    let mut inputs = Vec::with_capacity(length);
    let mut outputs = Vec::with_capacity(length * n);
    let mut states = vec![start];
    let mut costs = vec![0.0];
    loop {
        let depth = inputs.len();
        if depth == length {
            let state = states[depth];
            if end.is_none_or(|e| e == state) {
                paths.push(PathRecord {
                    inputs: inputs.clone(),
                    outputs: outputs.clone(),
                    end_state: state,
                    cost: costs[depth],
                });
            }
            // Backtrack to the deepest position with an untried input.
            loop {
                let Some(u) = inputs.pop() else {
                    return Ok(paths);
                };
                states.pop();
                costs.pop();
                outputs.truncate(inputs.len() * n);
                if u + 1 < k {
                    push_step(trellis, &mut cost, &mut inputs, &mut outputs, &mut states, &mut costs, u + 1);
                    break;
                }
            }
        } else {
            push_step(trellis, &mut cost, &mut inputs, &mut outputs, &mut states, &mut costs, 0);
        }
    }
}

fn push_step<F>(
    trellis: &Trellis,
    cost: &mut F,
    inputs: &mut Vec<usize>,
    outputs: &mut Vec<f64>,
    states: &mut Vec<usize>,
    costs: &mut Vec<f64>,
    u: usize,
) where
    F: FnMut(usize, BranchRef<'_>) -> f64,
{
    let section = inputs.len();
    let from = states[section];
    let b = trellis.branch(trellis.branch_index(from, u));
    let c = costs[section] + cost(section, b);
    inputs.push(u);
    outputs.extend_from_slice(b.output);
    states.push(b.to);
    costs.push(c);
}
