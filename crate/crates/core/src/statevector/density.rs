use num_complex::Complex64 as C64;

use super::{shift_of, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, HERMITIAN_TOL};

const PSD_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if !matrix.is_square() || dim == 0 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be 2^n x 2^n, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = linalg::hermiticity_defect(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("trace is {tr}")));
        }
        let min = linalg::hermitian_eigenvalues(&matrix)[0];
        if min < -PSD_TOL {
            return Err(Error::InvalidDensity(format!("minimum eigenvalue {min}")));
        }
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1usize << n;
        Self {
            num_qubits: n,
            matrix: linalg::identity(d) * C64::new(1.0 / d as f64, 0.0),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `tr(O ρ)` for a Hermitian `O`.
    pub fn expectation(&self, observable: &CMatrix) -> Result<f64> {
        if observable.nrows() != self.dim() || observable.ncols() != self.dim() {
            return Err(Error::DimensionMismatch("observable size".into()));
        }
        Ok(linalg::trace(&(observable * &self.matrix)).re)
    }

    /// Trace distance `½‖self − other‖₁`.
    pub fn trace_distance(&self, other: &CMatrix) -> Result<f64> {
        Ok(0.5 * linalg::trace_norm(&(&self.matrix - other))?)
    }

    /// A state vector `|Ψ⟩` on `2n` qubits (system first, purifying register
    /// second) whose reduction to the first `n` qubits is `self`.
    pub fn purify(&self) -> Result<StateVector> {
        let d = self.dim();
        let (vals, vecs) = linalg::hermitian_eigen(&self.matrix);
        let mut amps = vec![C64::new(0.0, 0.0); d * d];
        for k in 0..d {
            let w = vals[k].max(0.0).sqrt();
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                amps[i * d + k] = vecs[(i, k)] * w;
            }
        }
        let mut s = StateVector::from_amplitudes(amps)?;
        s.normalize()?;
        Ok(s)
    }
}

pub fn density_from_state(state: &StateVector) -> Result<DensityMatrix> {
    let s = state.clone().normalized()?;
    Ok(DensityMatrix {
        num_qubits: s.num_qubits(),
        matrix: linalg::outer(s.amplitudes()),
    })
}

/// Reduced density matrix of the normalized `state` on the qubits in `keep`,
/// ordered as listed.
pub fn reduced_density(state: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    state.validate_targets(keep)?;
    let s = state.clone().normalized()?;
    let m = s.num_qubits();
    let k = keep.len();
    let traced: Vec<usize> = (0..m).filter(|q| !keep.contains(q)).collect();
    let keep_shifts: Vec<usize> = keep.iter().map(|&q| shift_of(m, q)).collect();
    let traced_shifts: Vec<usize> = traced.iter().map(|&q| shift_of(m, q)).collect();
    let spread = |value: usize, shifts: &[usize]| -> usize {
        let len = shifts.len();
        shifts
            .iter()
            .enumerate()
            .map(|(j, &sh)| ((value >> (len - 1 - j)) & 1) << sh)
            .sum()
    };
    let dk = 1usize << k;
    let keep_idx: Vec<usize> = (0..dk).map(|v| spread(v, &keep_shifts)).collect();
    let mut rho = CMatrix::zeros(dk, dk);
    for r in 0..(1usize << traced.len()) {
        let base = spread(r, &traced_shifts);
        for i in 0..dk {
            let ai = s.amplitude(base | keep_idx[i]);
            if ai == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dk {
                rho[(i, j)] += ai * s.amplitude(base | keep_idx[j]).conj();
            }
        }
    }
    Ok(DensityMatrix {
        num_qubits: k,
        matrix: rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_density_matrix;
    use crate::rng;

    #[test]
    fn rho_minus_rho_has_zero_trace_norm() {
        let mut r = rng::from_seed(11);
        let rho = sample_density_matrix(2, &mut r).unwrap();
        let diff = rho.matrix() - rho.matrix();
        assert_eq!(linalg::trace_norm(&diff).unwrap(), 0.0);
    }

    #[test]
    fn purification_reduces_back() {
        let mut r = rng::from_seed(12);
        let rho = sample_density_matrix(2, &mut r).unwrap();
        let psi = rho.purify().unwrap();
        let back = reduced_density(&psi, &[0, 1]).unwrap();
        assert!(linalg::max_abs(&(back.matrix() - rho.matrix())) < 1e-12);
    }

    #[test]
    fn rejects_invalid_matrices() {
        let c = |x: f64| C64::new(x, 0.0);
        let neg = CMatrix::from_row_slice(2, 2, &[c(1.5), c(0.0), c(0.0), c(-0.5)]);
        assert!(matches!(DensityMatrix::new(neg), Err(Error::InvalidDensity(_))));
        let trace2 = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(trace2).is_err());
    }
}
