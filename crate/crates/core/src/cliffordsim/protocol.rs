//! Clifford gate teleportation and the Clifford spacetime conversion. Pauli
//! byproducts are pushed through the remaining Clifford circuit in the
//! Heisenberg picture and undone by a single classically computed Pauli.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CliffordCircuit, CliffordTableau, PauliString};
use crate::bits::Bits;
use crate::ensembles::prepare_epr;
use crate::error::{Error, Result};
use crate::statevector::StateVector;
use crate::teleport::{bell_measure, depth_budget, segment_depth, teleport_gate, SpacetimeTrace, TeleportTrace};

/// `|I, V⟩` for a Clifford circuit `V` on `n` qubits.
pub fn clifford_choi(v: &CliffordCircuit) -> Result<StateVector> {
    let mut s = prepare_epr(v.num_qubits())?;
    v.apply_to_state(&mut s, v.num_qubits())?;
    Ok(s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliffordTeleport {
    /// Raw post-measurement state `(P' V ⊗ I)|ψ⟩`.
    pub post: StateVector,
    /// `P' = V P V†` for the Bell Pauli `P = X^a Z^b`.
    pub correction: PauliString,
    /// `P'† · post = (V ⊗ I)|ψ⟩`.
    pub corrected: StateVector,
    pub trace: TeleportTrace,
}

/// Teleports the Clifford `v` onto the first `n` qubits of `input` and
/// computes the Pauli correction from the tableau of `v`.
pub fn clifford_teleport<R: Rng + ?Sized>(
    v: &CliffordCircuit,
    input: &StateVector,
    rng: &mut R,
) -> Result<CliffordTeleport> {
    let n = v.num_qubits();
    let choi = clifford_choi(v)?;
    let (post, trace) = teleport_gate(&choi, input, rng)?;
    let correction = CliffordTableau::from_circuit(v)?.conjugate(&trace.pauli_error)?;
    let mut corrected = post.clone();
    let targets: Vec<usize> = (0..n).collect();
    correction.dagger().apply_to_state(&mut corrected, &targets)?;
    Ok(CliffordTeleport { post, correction, corrected, trace })
}

/// Order in which neighbouring blocks are joined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MergeOrder {
    #[default]
    LeftToRight,
    RightToLeft,
}

/// `|I, Q C⟩` up to phase, tracking the Clifford part `C` and Pauli `Q`.
struct CliffordChoi {
    state: StateVector,
    circuit: CliffordCircuit,
    pauli: PauliString,
}

fn clifford_block(first: &CliffordCircuit, second: &CliffordCircuit) -> Result<CliffordChoi> {
    let n = first.num_qubits();
    let mut state = prepare_epr(n)?;
    first.transpose().apply_to_state(&mut state, 0)?;
    second.apply_to_state(&mut state, n)?;
    Ok(CliffordChoi { state, circuit: first.then(second)?, pauli: PauliString::identity(n) })
}

/// Bell-measures `(B_l, A_r)`; the joined state is
/// `|I, Q_r C_r P^T Q_l C_l⟩ = |I, Q C_r C_l⟩` with
/// `Q = Q_r · C_r (P^T Q_l) C_r†`.
fn clifford_link<R: Rng + ?Sized>(
    left: &CliffordChoi,
    right: &CliffordChoi,
    rng: &mut R,
) -> Result<(CliffordChoi, crate::teleport::BellOutcome, f64)> {
    let n = left.circuit.num_qubits();
    let joint = left.state.tensor(&right.state)?;
    let pairs: Vec<(usize, usize)> = (0..n).map(|i| (n + i, 2 * n + i)).collect();
    let (outcome, state, prob) = bell_measure(&joint, &pairs, rng)?;
    let pushed = right.circuit.conjugate_pauli(&outcome.pauli().transpose().mul(&left.pauli)?)?;
    let pauli = right.pauli.mul(&pushed)?;
    Ok((CliffordChoi { state, circuit: left.circuit.then(&right.circuit)?, pauli }, outcome, prob))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliffordSpacetimeRun {
    /// Output after the Pauli correction.
    pub state: StateVector,
    pub raw_state: StateVector,
    /// Pauli `T` with `raw_state ∝ T · C|input⟩`.
    pub correction: PauliString,
    pub trace: SpacetimeTrace,
}

/// Prepares `C|0^n⟩` (or `C|input⟩` for odd `k`) with `k` blocks of depth
/// `⌊t/k⌋+2`, one Bell-measurement layer and a final Pauli correction.
pub fn clifford_spacetime<R: Rng + ?Sized>(
    c: &CliffordCircuit,
    k: usize,
    input: Option<&StateVector>,
    order: MergeOrder,
    rng: &mut R,
) -> Result<CliffordSpacetimeRun> {
    let n = c.num_qubits();
    let t = c.depth();
    let depth_used = depth_budget(t, k)?;
    if n == 0 {
        return Err(Error::invalid("circuit has no qubits"));
    }
    if input.is_some() && k % 2 == 0 {
        return Err(Error::invalid(format!("an arbitrary input needs odd k, got {k}")));
    }
    if let Some(s) = input {
        if s.num_qubits() != n {
            return Err(Error::DimensionMismatch(format!("{}-qubit input for a {n}-qubit circuit", s.num_qubits())));
        }
    }
    let segments = c.split_segments(k)?;
    let d2 = segment_depth(t, k);
    if segments.iter().any(|s| s.depth() > d2) {
        return Err(Error::invalid("segment deeper than the block budget"));
    }
    let (lead, paired) = if k % 2 == 1 { (Some(&segments[0]), &segments[1..]) } else { (None, &segments[..]) };
    let blocks = paired
        .chunks(2)
        .map(|pair| clifford_block(&pair[0], &pair[1]))
        .collect::<Result<Vec<_>>>()?;

    let mut bell_outcomes = Vec::new();
    let mut prob = 1.0;
    let mut blocks = blocks.into_iter();
    let chain = match order {
        MergeOrder::LeftToRight => {
            let mut cur = blocks.next().expect("at least one block");
            for next in blocks {
                let (joined, o, p) = clifford_link(&cur, &next, rng)?;
                cur = joined;
                bell_outcomes.push(o);
                prob *= p;
            }
            cur
        }
        MergeOrder::RightToLeft => {
            let all: Vec<CliffordChoi> = blocks.collect();
            let mut iter = all.into_iter().rev();
            let mut cur = iter.next().expect("at least one block");
            for prev in iter {
                let (joined, o, p) = clifford_link(&prev, &cur, rng)?;
                cur = joined;
                bell_outcomes.push(o);
                prob *= p;
            }
            cur
        }
    };

    let targets: Vec<usize> = (0..n).collect();
    let (raw_state, correction, computational_outcome) = match lead {
        None => {
            let (j, post, p) = chain.state.measure_computational(&targets, rng)?;
            prob *= p;
            let xj = PauliString::from_bits(&j, &Bits::zeros(n))?;
            let correction = chain.pauli.mul(&chain.circuit.conjugate_pauli(&xj)?)?;
            (post, correction, Some(j))
        }
        Some(first) => {
            let mut register = match input {
                Some(s) => s.clone().normalized()?,
                None => StateVector::zero(n)?,
            };
            first.apply_to_state(&mut register, 0)?;
            let (post, trace) = teleport_gate(&chain.state, &register, rng)?;
            prob *= trace.postselect_prob;
            bell_outcomes.push(trace.outcome);
            let correction = chain.pauli.mul(&chain.circuit.conjugate_pauli(&trace.pauli_error)?)?;
            (post, correction, None)
        }
    };
    let mut state = raw_state.clone();
    correction.dagger().apply_to_state(&mut state, &targets)?;
    Ok(CliffordSpacetimeRun {
        state,
        raw_state,
        correction,
        trace: SpacetimeTrace {
            n,
            k,
            t,
            bell_outcomes,
            computational_outcome,
            branch_probability: prob,
            depth_used,
            effective_t: t,
            qubits_used: k * n,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cliffordsim::{random_clifford, random_layered_clifford};
    use crate::ensembles::sample_haar_state;
    use crate::linalg;
    use crate::rng;
    use crate::statevector::fidelity;

    #[test]
    fn identity_teleport_correction_is_bell_pauli() {
        let mut r = rng::from_seed(81);
        let v = CliffordCircuit::new(2);
        let psi = sample_haar_state(3, &mut r).unwrap();
        for _ in 0..10 {
            let out = clifford_teleport(&v, &psi, &mut r).unwrap();
            assert_eq!(out.correction, out.trace.pauli_error);
            assert!(fidelity(&out.corrected, &psi).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn corrected_teleport_matches_dense() {
        let mut r = rng::from_seed(82);
        let v = random_clifford(3, &mut r);
        for _ in 0..100 {
            let psi = sample_haar_state(4, &mut r).unwrap();
            let out = clifford_teleport(&v, &psi, &mut r).unwrap();
            let mut expected = psi.clone();
            v.apply_to_state(&mut expected, 0).unwrap();
            assert!(fidelity(&out.corrected, &expected).unwrap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn tableau_correction_matches_dense_conjugation() {
        let mut r = rng::from_seed(83);
        for n in 1..=3 {
            let v = random_clifford(n, &mut r);
            let u = v.unitary().unwrap();
            let psi = sample_haar_state(n, &mut r).unwrap();
            let out = clifford_teleport(&v, &psi, &mut r).unwrap();
            let dense = &u * out.trace.pauli_error.to_matrix().unwrap() * u.adjoint();
            assert!(linalg::max_abs(&(dense - out.correction.to_matrix().unwrap())) < 1e-10);
        }
    }

    #[test]
    fn identity_circuit_gives_zero_state() {
        let mut r = rng::from_seed(84);
        for k in 2..=5 {
            let c = CliffordCircuit::identity(3, 0);
            let run = clifford_spacetime(&c, k, None, MergeOrder::LeftToRight, &mut r).unwrap();
            assert!(fidelity(&run.state, &StateVector::zero(3).unwrap()).unwrap() > 1.0 - 1e-12);
            assert_eq!(run.trace.depth_used, 4);
        }
    }

    #[test]
    fn spacetime_matches_dense_oracle() {
        let mut r = rng::from_seed(85);
        for k in 2..=5 {
            for _ in 0..10 {
                let c = random_layered_clifford(3, 10, &mut r);
                let mut expected = StateVector::zero(3).unwrap();
                c.apply_to_state(&mut expected, 0).unwrap();
                let run = clifford_spacetime(&c, k, None, MergeOrder::LeftToRight, &mut r).unwrap();
                assert!(fidelity(&run.state, &expected).unwrap() > 1.0 - 1e-10);
                assert_eq!(run.trace.depth_used, 10 / k + 4);
            }
        }
    }

    #[test]
    fn arbitrary_input_with_odd_k() {
        let mut r = rng::from_seed(86);
        let c = random_layered_clifford(3, 9, &mut r);
        let phi = sample_haar_state(3, &mut r).unwrap();
        let mut expected = phi.clone();
        c.apply_to_state(&mut expected, 0).unwrap();
        for _ in 0..10 {
            let run = clifford_spacetime(&c, 3, Some(&phi), MergeOrder::LeftToRight, &mut r).unwrap();
            assert!(fidelity(&run.state, &expected).unwrap() > 1.0 - 1e-10);
        }
        assert!(clifford_spacetime(&c, 2, Some(&phi), MergeOrder::LeftToRight, &mut r).is_err());
    }

    #[test]
    fn merge_order_does_not_change_result() {
        let mut r = rng::from_seed(87);
        for k in [4, 6, 7] {
            let c = random_layered_clifford(2, 14, &mut r);
            let a = clifford_spacetime(&c, k, None, MergeOrder::LeftToRight, &mut r).unwrap();
            let b = clifford_spacetime(&c, k, None, MergeOrder::RightToLeft, &mut r).unwrap();
            assert!(fidelity(&a.state, &b.state).unwrap() > 1.0 - 1e-10);
        }
    }
}
