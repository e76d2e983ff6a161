use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::projected::ProjectedEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::statevector::StateVector;

/// Largest `2^{nt}` for which moment operators are built.
pub const MAX_MOMENT_DIM: usize = 4096;

fn check_states(states: &[StateVector], t: usize) -> Result<()> {
    let first = states.first().ok_or_else(|| Error::invalid("empty state list"))?;
    if t == 0 {
        return Err(Error::invalid("moment order must be at least 1"));
    }
    if states.iter().any(|s| s.num_qubits() != first.num_qubits()) {
        return Err(Error::DimensionMismatch("states differ in size".into()));
    }
    Ok(())
}

fn overlap_power(a: &StateVector, b: &StateVector, t: usize) -> f64 {
    let ov: C64 = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x.conj() * y).sum();
    ov.norm_sqr().powi(t as i32)
}

/// `(1/N²) Σ_{i,j} |⟨ψ_i|ψ_j⟩|^{2t}`, diagonal included.
pub fn frame_potential(states: &[StateVector], t: usize) -> Result<f64> {
    check_states(states, t)?;
    let n = states.len();
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| states.iter().map(|s| overlap_power(&states[i], s, t)).sum::<f64>())
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(total / (n * n) as f64)
}

/// `Σ_{i,j} p_i p_j |⟨ψ_i|ψ_j⟩|^{2t}` of a weighted ensemble.
pub fn ensemble_frame_potential(ensemble: &ProjectedEnsemble, t: usize) -> Result<f64> {
    if t == 0 {
        return Err(Error::invalid("moment order must be at least 1"));
    }
    let e = ensemble.entries();
    Ok((0..e.len())
        .into_par_iter()
        .map(|i| {
            e.iter()
                .map(|f| e[i].probability * f.probability * overlap_power(&e[i].state, &f.state, t))
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum())
}

/// `t!(D−1)!/(D+t−1)!` with `D = 2^n`.
pub fn haar_frame_potential(n: usize, t: usize) -> f64 {
    let d = (1u64 << n) as f64;
    (1..=t).map(|i| i as f64 / (d + i as f64 - 1.0)).product()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Frame potential of the distribution the states were drawn from: the mean
/// over distinct pairs, with a first-order U-statistic standard error.
pub fn frame_potential_estimate(states: &[StateVector], t: usize) -> Result<FrameEstimate> {
    check_states(states, t)?;
    let n = states.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            states
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, s)| overlap_power(&states[i], s, t))
                .sum::<f64>()
                / (n - 1) as f64
        })
        .collect();
    let value = rows.iter().sum::<f64>() / n as f64;
    let var_h = rows.iter().map(|h| (h - value).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(FrameEstimate { value, stderr: (4.0 * var_h / n as f64).sqrt(), samples: n })
}

/// Occupation vectors of `t` particles in `d` modes, lexicographic.
fn occupations(d: usize, t: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            rec(d, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, t, &mut Vec::with_capacity(d), &mut out);
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Coordinates of `|ψ⟩^{⊗t}` in the orthonormal occupation basis of the
/// symmetric subspace.
fn symmetric_coords(psi: &StateVector, occ: &[Vec<usize>], t: usize) -> Vec<C64> {
    let amps = psi.amplitudes();
    let tf = factorial(t);
    occ.iter()
        .map(|m| {
            let mut c = C64::new((tf / m.iter().map(|&k| factorial(k)).product::<f64>()).sqrt(), 0.0);
            for (k, &mk) in m.iter().enumerate() {
                if mk > 0 {
                    c *= amps[k].powu(mk as u32);
                }
            }
            c
        })
        .collect()
}

/// `‖Σ p_i (|ψ_i⟩⟨ψ_i|)^{⊗t} − Π_sym / dim Sym‖_1`, evaluated inside the
/// symmetric subspace where both operators live.
pub fn moment_distance(ensemble: &ProjectedEnsemble, t: usize) -> Result<f64> {
    let n = ensemble.num_qubits();
    if t == 0 {
        return Err(Error::invalid("moment order must be at least 1"));
    }
    if n * t > MAX_MOMENT_DIM.trailing_zeros() as usize {
        return Err(Error::TooManyQubits { requested: n * t, limit: MAX_MOMENT_DIM.trailing_zeros() as usize });
    }
    let occ = occupations(1 << n, t);
    let dim = occ.len();
    let mut m = linalg::identity(dim) * C64::new(-1.0 / dim as f64, 0.0);
    for e in ensemble.entries() {
        let v = symmetric_coords(&e.state, &occ, t);
        m += linalg::outer(&v) * C64::new(e.probability, 0.0);
    }
    linalg::trace_norm(&m)
}

/// Dense `(|ψ⟩⟨ψ|)^{⊗t}` moment operator on the full `2^{nt}` space.
pub fn moment_operator(ensemble: &ProjectedEnsemble, t: usize) -> Result<CMatrix> {
    let n = ensemble.num_qubits();
    if t == 0 || n * t > MAX_MOMENT_DIM.trailing_zeros() as usize {
        return Err(Error::TooManyQubits { requested: n * t, limit: MAX_MOMENT_DIM.trailing_zeros() as usize });
    }
    let dim = 1usize << (n * t);
    let mut m = CMatrix::zeros(dim, dim);
    for e in ensemble.entries() {
        let mut v = vec![C64::new(1.0, 0.0)];
        for _ in 0..t {
            v = v.iter().flat_map(|a| e.state.amplitudes().iter().map(move |b| a * b)).collect();
        }
        m += linalg::outer(&v) * C64::new(e.probability, 0.0);
    }
    Ok(m)
}
