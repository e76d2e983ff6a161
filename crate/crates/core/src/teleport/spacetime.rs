//! Trading circuit depth for qubits: a depth-`t` random circuit on `n`
//! qubits is produced from `k` shallow blocks joined by Bell measurements.
//!
//! Each block is a Choi state `|I, U2 U1^T⟩` made by running independent
//! brickwork circuits `U1`, `U2` of depth `⌊t/k⌋+2` on the two halves of an
//! EPR register. Neighbouring blocks are joined by Bell-measuring the right
//! half of one with the left half of the next. Both brickworks in a block
//! start on the parity that makes every junction between layers line up, so
//! the recorded program collapses to a standard brickwork circuit whose first
//! layer acts on `(0,1), (2,3), …`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{bell_measure, teleport_gate, BellOutcome, ChoiRecord, EffectiveProgram};
use crate::bits::Bits;
use crate::cliffordsim::PauliString;
use crate::ensembles::{build_brickwork_with_parity, prepare_epr};
use crate::error::{Error, Result};
use crate::statevector::StateVector;

/// Total depth `⌊t/k⌋ + 4` of the converted protocol.
pub fn depth_budget(t: usize, k: usize) -> Result<usize> {
    if k < 2 {
        return Err(Error::invalid(format!("spacetime conversion needs k >= 2, got {k}")));
    }
    Ok(t / k + 4)
}

/// Depth `⌊t/k⌋ + 2` of the random layers in each block.
pub fn segment_depth(t: usize, k: usize) -> usize {
    t / k.max(1) + 2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeTrace {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub bell_outcomes: Vec<BellOutcome>,
    pub computational_outcome: Option<Bits>,
    pub branch_probability: f64,
    pub depth_used: usize,
    pub effective_t: usize,
    pub qubits_used: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimeRun {
    pub state: StateVector,
    pub trace: SpacetimeTrace,
    /// The circuit that was effectively applied, Pauli byproducts included.
    pub program: EffectiveProgram,
}

fn random_block<R: Rng + ?Sized>(n: usize, d2: usize, rng: &mut R) -> Result<ChoiRecord> {
    let parity = ((d2 - 1) % 2) as u8;
    let u1 = build_brickwork_with_parity(n, d2, parity, rng)?;
    let u2 = build_brickwork_with_parity(n, d2, parity, rng)?;
    let mut state = prepare_epr(n)?;
    u1.apply_at(&mut state, 0)?;
    u2.apply_at(&mut state, n)?;
    let program = EffectiveProgram::from_brickwork(&u1)
        .transpose()
        .then(&EffectiveProgram::from_brickwork(&u2))?;
    Ok(ChoiRecord { state, program })
}

/// Joins `|I,W_l⟩` on `(A_l, B_l)` and `|I,W_r⟩` on `(A_r, B_r)` by
/// Bell-measuring `(B_l, A_r)`; the result is `|I, W_r Z^b X^a W_l⟩` on
/// `(A_l, B_r)`.
pub fn link_choi<R: Rng + ?Sized>(
    left: &ChoiRecord,
    right: &ChoiRecord,
    rng: &mut R,
) -> Result<(ChoiRecord, BellOutcome, f64)> {
    let two_n = left.state.num_qubits();
    if right.state.num_qubits() != two_n || two_n % 2 != 0 {
        return Err(Error::DimensionMismatch("Choi states of different sizes".into()));
    }
    let n = two_n / 2;
    let joint = left.state.tensor(&right.state)?;
    let pairs: Vec<(usize, usize)> = (0..n).map(|i| (n + i, two_n + i)).collect();
    let (outcome, state, prob) = bell_measure(&joint, &pairs, rng)?;
    let mut program = left.program.clone();
    program.push_pauli(outcome.pauli().transpose())?;
    let program = program.then(&right.program)?;
    Ok((ChoiRecord { state, program }, outcome, prob))
}

struct Chain {
    record: ChoiRecord,
    outcomes: Vec<BellOutcome>,
    prob: f64,
}

fn build_chain<R: Rng + ?Sized>(n: usize, blocks: usize, d2: usize, rng: &mut R) -> Result<Chain> {
    let mut record = random_block(n, d2, rng)?;
    let mut outcomes = Vec::new();
    let mut prob = 1.0;
    for _ in 1..blocks {
        let next = random_block(n, d2, rng)?;
        let (joined, outcome, p) = link_choi(&record, &next, rng)?;
        record = joined;
        outcomes.push(outcome);
        prob *= p;
    }
    Ok(Chain { record, outcomes, prob })
}

fn validate(n: usize, k: usize, t: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("spacetime conversion needs n >= 2, got {n}")));
    }
    if k < 2 {
        return Err(Error::invalid(format!("spacetime conversion needs k >= 2, got {k}")));
    }
    if t < 1 {
        return Err(Error::invalid("spacetime conversion needs t >= 1"));
    }
    Ok(())
}

fn finish(
    n: usize,
    k: usize,
    t: usize,
    state: StateVector,
    program: EffectiveProgram,
    bell_outcomes: Vec<BellOutcome>,
    computational_outcome: Option<Bits>,
    branch_probability: f64,
) -> Result<SpacetimeRun> {
    let effective_t = program.effective_depth()?;
    Ok(SpacetimeRun {
        state,
        trace: SpacetimeTrace {
            n,
            k,
            t,
            bell_outcomes,
            computational_outcome,
            branch_probability,
            depth_used: depth_budget(t, k)?,
            effective_t,
            qubits_used: k * n,
        },
        program,
    })
}

/// Runs the odd-`k` tail: `V` of depth `⌊t/k⌋+2` on the spare register
/// holding `input`, then the chain teleports it through `W`.
fn odd_tail<R: Rng + ?Sized>(
    input: &StateVector,
    k: usize,
    t: usize,
    rng: &mut R,
) -> Result<SpacetimeRun> {
    let n = input.num_qubits();
    let d2 = segment_depth(t, k);
    let v = build_brickwork_with_parity(n, d2, 0, rng)?;
    let chain = build_chain(n, (k - 1) / 2, d2, rng)?;
    let mut register = input.clone();
    v.apply(&mut register)?;
    let (state, trace) = teleport_gate(&chain.record.state, &register, rng)?;
    let mut program = EffectiveProgram::from_brickwork(&v);
    program.push_pauli(trace.pauli_error.clone())?;
    let program = program.then(&chain.record.program)?;
    let mut outcomes = chain.outcomes;
    outcomes.push(trace.outcome);
    finish(n, k, t, state, program, outcomes, None, chain.prob * trace.postselect_prob)
}

/// Samples a state distributed as a depth-`effective_t` brickwork state on
/// `n` qubits using `k·n` qubits and depth `⌊t/k⌋+4`.
pub fn spacetime_convert_state<R: Rng + ?Sized>(n: usize, k: usize, t: usize, rng: &mut R) -> Result<SpacetimeRun> {
    validate(n, k, t)?;
    if k % 2 == 1 {
        return odd_tail(&StateVector::zero(n)?, k, t, rng);
    }
    let d2 = segment_depth(t, k);
    let chain = build_chain(n, k / 2, d2, rng)?;
    let a_qubits: Vec<usize> = (0..n).collect();
    let (j, state, p) = chain.record.state.measure_computational(&a_qubits, rng)?;
    let mut program = EffectiveProgram::new(n);
    program.push_pauli(PauliString::from_bits(&j, &Bits::zeros(n))?)?;
    let program = program.then(&chain.record.program)?;
    finish(n, k, t, state, program, chain.outcomes, Some(j), chain.prob * p)
}

/// Applies a random circuit of depth `effective_t ≥ t` to `input`; `k` must
/// be odd.
pub fn spacetime_convert_apply<R: Rng + ?Sized>(
    input: &StateVector,
    k: usize,
    t: usize,
    rng: &mut R,
) -> Result<SpacetimeRun> {
    validate(input.num_qubits(), k, t)?;
    if k % 2 == 0 {
        return Err(Error::invalid(format!("applying a circuit to an input needs odd k, got {k}")));
    }
    let input = input.clone().normalized()?;
    odd_tail(&input, k, t, rng)
}
