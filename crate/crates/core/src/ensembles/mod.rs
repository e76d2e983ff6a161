//! Random circuit and state ensembles.

mod brickwork;

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use brickwork::{
    build_brickwork, build_brickwork_with_parity, declared_volume, layer_pairs, BrickLayer, BrickworkCircuit,
    GatePlacement,
};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::statevector::{DensityMatrix, GateMatrix, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnsembleSpec {
    /// `U|0^m⟩` with `U` a depth-`d` brickwork circuit.
    BrickworkStates { m: usize, d: usize },
    /// `(I ⊗ U)|EPR^n⟩` with `U` a depth-`t` brickwork circuit on `n` qubits.
    BrickworkChoi { n: usize, t: usize },
    HaarStates { n: usize },
    /// Product of uniform picks from `{|0⟩, |+⟩, |+i⟩}`.
    LocalStab { n: usize },
    /// Uniformly random stabilizer states.
    CliffordStates { n: usize },
}

impl EnsembleSpec {
    pub fn num_qubits(&self) -> usize {
        match *self {
            EnsembleSpec::BrickworkStates { m, .. } => m,
            EnsembleSpec::BrickworkChoi { n, .. } => 2 * n,
            EnsembleSpec::HaarStates { n } | EnsembleSpec::LocalStab { n } | EnsembleSpec::CliffordStates { n } => n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            EnsembleSpec::BrickworkStates { m, .. } if m < 2 => {
                Err(Error::invalid("brickwork states need m >= 2"))
            }
            EnsembleSpec::BrickworkChoi { n, .. } if n < 2 => Err(Error::invalid("brickwork Choi states need n >= 2")),
            EnsembleSpec::HaarStates { n } | EnsembleSpec::LocalStab { n } | EnsembleSpec::CliffordStates { n }
                if n == 0 =>
            {
                Err(Error::invalid("ensembles need at least one qubit"))
            }
            _ => Ok(()),
        }
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * FRAC_1_SQRT_2
}

/// Haar-random unitary: Gram–Schmidt on a complex Ginibre matrix. Normalizing
/// each column by its positive norm fixes the triangular factor's diagonal to
/// be positive, which is what makes the result exactly Haar distributed.
pub fn sample_haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = (0..dim).map(|_| (0..dim).map(|_| gaussian(rng)).collect()).collect();
    for j in 0..dim {
        for _ in 0..2 {
            for k in 0..j {
                let proj: C64 = (0..dim).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                for i in 0..dim {
                    let v = cols[k][i];
                    cols[j][i] -= proj * v;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|z| *z /= norm);
    }
    CMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

pub fn sample_haar_su4<R: Rng + ?Sized>(rng: &mut R) -> GateMatrix {
    GateMatrix::new_unchecked(sample_haar_unitary(4, rng)).expect("4x4 matrix")
}

/// Haar-random pure state; the normalized Gaussian vector is distributed as
/// the first column of a Haar unitary.
pub fn sample_haar_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StateVector> {
    if n > crate::statevector::max_qubits() {
        return Err(Error::TooManyQubits { requested: n, limit: crate::statevector::max_qubits() });
    }
    let amps = (0..1usize << n).map(|_| gaussian(rng)).collect();
    StateVector::from_amplitudes(amps)?.normalized()
}

/// Random full-rank density matrix `GG†/tr(GG†)` from a Ginibre matrix.
pub fn sample_density_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
    let d = 1usize << n;
    let g = CMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let w = &g * g.adjoint();
    let tr = linalg::trace(&w).re;
    DensityMatrix::new(w / C64::new(tr, 0.0))
}

/// Single-qubit states `|0⟩`, `|+⟩`, `|+i⟩` for indices 0, 1, 2.
pub fn local_stab_qubit(index: u8) -> [C64; 2] {
    let h = FRAC_1_SQRT_2;
    match index {
        0 => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        1 => [C64::new(h, 0.0), C64::new(h, 0.0)],
        2 => [C64::new(h, 0.0), C64::new(0.0, h)],
        _ => panic!("local stabilizer index must be 0, 1 or 2"),
    }
}

pub fn product_state(factors: &[[C64; 2]]) -> Result<StateVector> {
    let mut amps = vec![C64::new(1.0, 0.0)];
    for f in factors {
        amps = amps.iter().flat_map(|a| [a * f[0], a * f[1]]).collect();
    }
    StateVector::from_amplitudes(amps)
}

pub fn local_stab_state(indices: &[u8]) -> Result<StateVector> {
    let factors: Vec<[C64; 2]> = indices.iter().map(|&i| local_stab_qubit(i)).collect();
    product_state(&factors)
}

pub fn sample_local_stab_indices<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..3u8)).collect()
}

pub fn sample_state<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<StateVector> {
    spec.validate()?;
    match *spec {
        EnsembleSpec::BrickworkStates { m, d } => {
            let c = build_brickwork(m, d, rng)?;
            let mut s = StateVector::zero(m)?;
            c.apply(&mut s)?;
            Ok(s)
        }
        EnsembleSpec::BrickworkChoi { n, t } => Ok(sample_choi(n, t, rng)?.0),
        EnsembleSpec::HaarStates { n } => sample_haar_state(n, rng),
        EnsembleSpec::LocalStab { n } => local_stab_state(&sample_local_stab_indices(n, rng)),
        EnsembleSpec::CliffordStates { n } => {
            let c = crate::cliffordsim::random_clifford(n, rng);
            let mut s = StateVector::zero(n)?;
            c.apply_to_state(&mut s, 0)?;
            Ok(s)
        }
    }
}

/// `n` EPR pairs; pair `i` is `(i, n+i)`.
pub fn prepare_epr(n: usize) -> Result<StateVector> {
    if n == 0 {
        return Err(Error::invalid("EPR register needs n >= 1"));
    }
    let d = 1usize << n;
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    let w = 1.0 / (d as f64).sqrt();
    for j in 0..d {
        amps[j * d + j] = C64::new(w, 0.0);
    }
    StateVector::from_amplitudes(amps)
}

/// `|I, U⟩ = (I ⊗ U)|EPR^n⟩` built directly from a dense unitary.
pub fn choi_state(n: usize, u: &CMatrix) -> Result<StateVector> {
    let d = 1usize << n;
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch(format!("{n}-qubit Choi state of a {}x{} matrix", u.nrows(), u.ncols())));
    }
    let w = 1.0 / (d as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            amps[i * d + j] = u[(j, i)] * w;
        }
    }
    StateVector::from_amplitudes(amps)
}

pub fn sample_choi<R: Rng + ?Sized>(n: usize, t: usize, rng: &mut R) -> Result<(StateVector, BrickworkCircuit)> {
    if n < 2 {
        return Err(Error::invalid("Choi states of brickwork circuits need n >= 2"));
    }
    let circuit = build_brickwork(n, t, rng)?;
    let mut state = prepare_epr(n)?;
    circuit.apply_at(&mut state, n)?;
    Ok((state, circuit))
}
