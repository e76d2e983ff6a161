//! Bell-basis measurement, gate teleportation and the spacetime conversion
//! protocols built on them.
//!
//! The Bell state labelled `(a, b)` on a pair `(p, q)` is
//! `(X^a Z^b ⊗ I)(|00⟩ + |11⟩)/√2` with the Pauli acting on `p`.

mod program;
mod spacetime;

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use program::{CollapsedProgram, EffectiveProgram, ProgramStep};
pub use spacetime::{
    depth_budget, link_choi, segment_depth, spacetime_convert_apply, spacetime_convert_state, SpacetimeRun,
    SpacetimeTrace,
};

use crate::bits::Bits;
use crate::cliffordsim::PauliString;
use crate::ensembles::BrickworkCircuit;
use crate::error::{Error, Result};
use crate::statevector::{insert_zero_bits, sample_index, shift_of, StateVector};

const MEASURE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BellOutcome {
    pub a: Bits,
    pub b: Bits,
}

impl BellOutcome {
    pub fn new(a: Bits, b: Bits) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch("outcome bit strings differ in length".into()));
        }
        Ok(Self { a, b })
    }

    pub fn num_pairs(&self) -> usize {
        self.a.len()
    }

    /// `a` followed by `b` as one integer.
    pub fn index(&self) -> u64 {
        (self.a.value() << self.b.len()) | self.b.value()
    }

    pub fn from_index(n: usize, index: u64) -> Self {
        Self { a: Bits::from_value(n, index >> n), b: Bits::from_value(n, index) }
    }

    /// `X^a Z^b`.
    pub fn pauli(&self) -> PauliString {
        PauliString::from_bits(&self.a, &self.b).expect("equal lengths")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeleportTrace {
    pub outcome: BellOutcome,
    pub pauli_error: PauliString,
    pub depth_used: usize,
    pub postselect_prob: f64,
}

fn validate_pairs(state: &StateVector, pairs: &[(usize, usize)]) -> Result<()> {
    let flat: Vec<usize> = pairs.iter().flat_map(|&(p, q)| [p, q]).collect();
    state.validate_targets(&flat)
}

/// Projects qubits `(p, q)` onto Bell state `(a, b)`; returns the
/// unnormalized residual on the other qubits.
fn project_pair(state: &StateVector, p: usize, q: usize, a: bool, b: bool) -> StateVector {
    let m = state.num_qubits();
    let sp = shift_of(m, p);
    let sq = shift_of(m, q);
    let mut sorted = [sp, sq];
    sorted.sort_unstable();
    let first = if a { 1usize << sp } else { 0 };
    let second = (if a { 0 } else { 1usize << sp }) | (1usize << sq);
    let sign = if b { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    let amps = state.amplitudes();
    let out: Vec<C64> = (0..1usize << (m - 2))
        .map(|r| {
            let base = insert_zero_bits(r, &sorted);
            amps[base | first] * FRAC_1_SQRT_2 + amps[base | second] * sign
        })
        .collect();
    StateVector::from_amplitudes(out).unwrap_or_else(|_| unreachable!())
}

fn position(alive: &[usize], q: usize) -> usize {
    alive.iter().position(|&x| x == q).expect("qubit still present")
}

/// `(⟨Bell_outcome| ⊗ I)|state⟩` on the unmeasured qubits (in their original
/// order), unnormalized, with its squared norm.
pub fn bell_project(state: &StateVector, pairs: &[(usize, usize)], outcome: &BellOutcome) -> Result<(StateVector, f64)> {
    validate_pairs(state, pairs)?;
    if outcome.num_pairs() != pairs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}-pair outcome for {} pairs",
            outcome.num_pairs(),
            pairs.len()
        )));
    }
    let mut alive: Vec<usize> = (0..state.num_qubits()).collect();
    let mut cur = state.clone();
    for (i, &(p, q)) in pairs.iter().enumerate() {
        let pp = position(&alive, p);
        let pq = position(&alive, q);
        cur = project_pair(&cur, pp, pq, outcome.a.get(i), outcome.b.get(i));
        alive.retain(|&x| x != p && x != q);
    }
    let prob = cur.norm_sqr();
    Ok((cur, prob))
}

/// Outcome probabilities indexed by [`BellOutcome::index`].
pub fn bell_probabilities(state: &StateVector, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    let n = pairs.len();
    (0..1u64 << (2 * n))
        .map(|i| Ok(bell_project(state, pairs, &BellOutcome::from_index(n, i))?.1))
        .collect()
}

/// Samples a joint Bell outcome pair by pair; returns the outcome, the
/// normalized residual state and the joint probability.
pub fn bell_measure<R: Rng + ?Sized>(
    state: &StateVector,
    pairs: &[(usize, usize)],
    rng: &mut R,
) -> Result<(BellOutcome, StateVector, f64)> {
    validate_pairs(state, pairs)?;
    let total = state.norm_sqr();
    if (total - 1.0).abs() > MEASURE_TOL {
        return Err(Error::CorruptedState(total));
    }
    let n = pairs.len();
    let mut a = Bits::zeros(n);
    let mut b = Bits::zeros(n);
    let mut alive: Vec<usize> = (0..state.num_qubits()).collect();
    let mut cur = state.clone();
    let mut prob = 1.0;
    for (i, &(p, q)) in pairs.iter().enumerate() {
        let pp = position(&alive, p);
        let pq = position(&alive, q);
        let branches: Vec<StateVector> = (0..4)
            .map(|k| project_pair(&cur, pp, pq, k & 2 != 0, k & 1 != 0))
            .collect();
        let probs: Vec<f64> = branches.iter().map(StateVector::norm_sqr).collect();
        let sum: f64 = probs.iter().sum();
        let k = sample_index(&probs, sum, rng);
        a.set(i, k & 2 != 0);
        b.set(i, k & 1 != 0);
        prob *= probs[k] / sum;
        cur = branches.into_iter().nth(k).expect("four branches").normalized()?;
        alive.retain(|&x| x != p && x != q);
    }
    Ok((BellOutcome { a, b }, cur, prob))
}

/// Consumes `|I,U⟩` on `A B` (A = qubits `0..n`) to act on the first `n`
/// qubits of `input`. The returned state lives on `B` followed by the
/// remaining input qubits and equals `(U X^a Z^b ⊗ I)|input⟩`.
pub fn teleport_gate<R: Rng + ?Sized>(
    choi: &StateVector,
    input: &StateVector,
    rng: &mut R,
) -> Result<(StateVector, TeleportTrace)> {
    let two_n = choi.num_qubits();
    if two_n % 2 != 0 || two_n == 0 {
        return Err(Error::DimensionMismatch(format!("Choi state on {two_n} qubits")));
    }
    let n = two_n / 2;
    if input.num_qubits() < n {
        return Err(Error::DimensionMismatch(format!(
            "input has {} qubits, the gate acts on {n}",
            input.num_qubits()
        )));
    }
    let joint = choi.tensor(input)?;
    let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, two_n + i)).collect();
    let (outcome, post, prob) = bell_measure(&joint, &pairs, rng)?;
    Ok((
        post,
        TeleportTrace { pauli_error: outcome.pauli(), outcome, depth_used: 1, postselect_prob: prob },
    ))
}

/// A Choi state `|I, W⟩` together with the recorded program of `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiRecord {
    pub state: StateVector,
    pub program: EffectiveProgram,
}

impl ChoiRecord {
    pub fn from_sample(state: StateVector, circuit: &BrickworkCircuit) -> Self {
        Self { state, program: EffectiveProgram::from_brickwork(circuit) }
    }
}

/// Merges `|I,U⟩_{AB}` and `|I,V⟩_{CD}` by Bell-measuring `(A_i, C_i)`;
/// the result on `BD` is `|I, V Z^b X^a U^T⟩`.
pub fn merge_choi<R: Rng + ?Sized>(
    left: &ChoiRecord,
    right: &ChoiRecord,
    rng: &mut R,
) -> Result<(ChoiRecord, TeleportTrace)> {
    if left.state.num_qubits() != right.state.num_qubits() {
        return Err(Error::DimensionMismatch("Choi states of different sizes".into()));
    }
    let (state, trace) = teleport_gate(&left.state, &right.state, rng)?;
    let mut program = left.program.transpose();
    program.push_pauli(trace.pauli_error.transpose())?;
    let program = program.then(&right.program)?;
    Ok((ChoiRecord { state, program }, trace))
}
