//! Exhaustive list of stabilizer states for small registers.

use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use super::CliffordGate;
use crate::error::{Error, Result};
use crate::statevector::StateVector;

pub const MAX_ENUMERATED_QUBITS: usize = 4;

static TABLES: [OnceLock<Vec<StateVector>>; MAX_ENUMERATED_QUBITS] =
    [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];

/// All `n`-qubit stabilizer states, one representative per global phase,
/// in a fixed order.
pub fn stabilizer_states(n: usize) -> Result<&'static [StateVector]> {
    if n == 0 || n > MAX_ENUMERATED_QUBITS {
        return Err(Error::invalid(format!(
            "stabilizer states are enumerated for 1..={MAX_ENUMERATED_QUBITS} qubits, got {n}"
        )));
    }
    Ok(TABLES[n - 1].get_or_init(|| enumerate(n)))
}

fn key(state: &StateVector) -> Vec<(i64, i64)> {
    let amps = state.amplitudes();
    let lead = amps.iter().find(|a| a.norm() > 1e-9).copied().unwrap_or(C64::new(1.0, 0.0));
    let unphase = lead.conj() / lead.norm();
    amps.iter()
        .map(|a| {
            let v = a * unphase;
            ((v.re * 1e6).round() as i64, (v.im * 1e6).round() as i64)
        })
        .collect()
}

fn canonical(state: &StateVector) -> StateVector {
    let amps = state.amplitudes();
    let lead = amps.iter().find(|a| a.norm() > 1e-9).copied().unwrap_or(C64::new(1.0, 0.0));
    let mut s = state.clone();
    s.scale(lead.conj() / lead.norm());
    s
}

fn enumerate(n: usize) -> Vec<StateVector> {
    let mut gates = Vec::new();
    for q in 0..n {
        gates.push(CliffordGate::H(q));
        gates.push(CliffordGate::S(q));
        for t in 0..n {
            if t != q {
                gates.push(CliffordGate::CX(q, t));
            }
        }
    }
    let start = StateVector::zero(n).expect("small register");
    let mut seen: HashMap<Vec<(i64, i64)>, usize> = HashMap::new();
    let mut states = vec![start.clone()];
    seen.insert(key(&start), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in &gates {
            let mut s = states[i].clone();
            s.apply_gate(&g.matrix(), &g.qubits()).expect("valid gate");
            let s = canonical(&s);
            let k = key(&s);
            if !seen.contains_key(&k) {
                seen.insert(k, states.len());
                queue.push_back(states.len());
                states.push(s);
            }
        }
    }
    states
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_counts() {
        assert_eq!(stabilizer_states(1).unwrap().len(), 6);
        assert_eq!(stabilizer_states(2).unwrap().len(), 60);
        assert_eq!(stabilizer_states(3).unwrap().len(), 1080);
        assert!(stabilizer_states(0).is_err());
    }
}
