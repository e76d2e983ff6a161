use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::sample::{measured_state, outcome_probabilities};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::statevector::{DensityMatrix, StateVector};
use crate::teleport::BellOutcome;

pub const MAX_COMPLETENESS_QUBITS: usize = 6;
const RANK_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub complete: bool,
    pub rank: usize,
    /// `4^n`, the real dimension of the Hermitian matrices.
    pub dimension: usize,
}

/// Orthonormal real coordinates of a Hermitian matrix.
fn hermitian_coords(m: &CMatrix) -> Vec<f64> {
    let d = m.nrows();
    let s = std::f64::consts::SQRT_2;
    let mut v = Vec::with_capacity(d * d);
    for i in 0..d {
        v.push(m[(i, i)].re);
        for j in i + 1..d {
            v.push(s * m[(i, j)].re);
            v.push(s * m[(i, j)].im);
        }
    }
    v
}

/// Real-linear rank of `{P|φ⟩⟨φ|P† : P = X^a Z^b} ∪ {I}`.
pub fn check_tomographic_completeness(states: &[StateVector], n: usize) -> Result<CompletenessReport> {
    if states.is_empty() {
        return Err(Error::invalid("empty ensemble"));
    }
    if n > MAX_COMPLETENESS_QUBITS {
        return Err(Error::TooManyQubits { requested: n, limit: MAX_COMPLETENESS_QUBITS });
    }
    if let Some(s) = states.iter().find(|s| s.num_qubits() != n) {
        return Err(Error::DimensionMismatch(format!("{}-qubit state in an {n}-qubit ensemble", s.num_qubits())));
    }
    let d = 1usize << n;
    let dimension = d * d;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let add = |v: Vec<f64>, basis: &mut Vec<Vec<f64>>| {
        let scale = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if scale == 0.0 {
            return;
        }
        let mut r = v;
        for _ in 0..2 {
            for b in basis.iter() {
                let c: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > RANK_TOL * scale {
            r.iter_mut().for_each(|x| *x /= norm);
            basis.push(r);
        }
    };
    add(hermitian_coords(&linalg::identity(d)), &mut basis);
    'outer: for phi in states {
        let phi = phi.clone().normalized()?;
        for index in 0..(dimension as u64) {
            if basis.len() == dimension {
                break 'outer;
            }
            // P|φ⟩ = X^a Z^b |φ⟩ up to phase: the conjugate of Z^b X^a |φ*⟩.
            let v = measured_state(&phi.conjugate(), &BellOutcome::from_index(n, index))?.conjugate();
            add(hermitian_coords(&linalg::outer(v.amplitudes())), &mut basis);
        }
    }
    Ok(CompletenessReport { complete: basis.len() == dimension, rank: basis.len(), dimension })
}

/// `E_{φ, ab} |b⟩⟨b|` by exhaustive enumeration over a finite ensemble and
/// all `4^n` outcomes, each ancilla equally likely.
pub fn expected_measured_projector(rho: &DensityMatrix, states: &[StateVector]) -> Result<CMatrix> {
    if states.is_empty() {
        return Err(Error::invalid("empty ensemble"));
    }
    let n = rho.num_qubits();
    let d = rho.dim();
    let mut acc = CMatrix::zeros(d, d);
    for phi in states {
        let probs = outcome_probabilities(rho, phi)?;
        for (index, p) in probs.iter().enumerate() {
            let b = measured_state(phi, &BellOutcome::from_index(n, index as u64))?;
            acc += linalg::outer(b.amplitudes()) * C64::new(*p, 0.0);
        }
    }
    Ok(acc / C64::new(states.len() as f64, 0.0))
}

/// `λ ρ + (1 − λ) tr(ρ) I / D`.
pub fn depolarize(rho: &CMatrix, lambda: f64) -> CMatrix {
    let d = rho.nrows();
    let tr = linalg::trace(rho);
    rho * C64::new(lambda, 0.0) + linalg::identity(d) * (tr * (1.0 - lambda) / d as f64)
}
