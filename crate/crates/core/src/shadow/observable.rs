use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::cliffordsim::PauliString;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::statevector::DensityMatrix;

/// `coeff · pauli` with `pauli` stored as a Hermitian Pauli whose phase
/// only accounts for its `Y` factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub pauli: PauliString,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObservableRepr {
    Dense(CMatrix),
    PauliSum(Vec<PauliTerm>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    num_qubits: usize,
    repr: ObservableRepr,
    locality: usize,
    infinity_norm_bound: f64,
}

fn y_count(p: &PauliString) -> u8 {
    p.x_bits().iter().zip(p.z_bits()).filter(|(x, z)| **x && **z).count() as u8
}

/// Exact spectral norm is computed densely up to this size.
const EXACT_NORM_QUBITS: usize = 8;

impl Observable {
    pub fn dense(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if !matrix.is_square() || dim == 0 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch("observable must be 2^n x 2^n".into()));
        }
        linalg::check_hermitian(&matrix)?;
        let norm = linalg::hermitian_eigenvalues(&matrix).iter().fold(0.0f64, |a, x| a.max(x.abs()));
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            repr: ObservableRepr::Dense(matrix),
            locality: dim.trailing_zeros() as usize,
            infinity_norm_bound: norm,
        })
    }

    /// Weighted sum of Hermitian Pauli strings; equal strings are merged.
    pub fn pauli_sum(num_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        let mut merged: BTreeMap<(Vec<bool>, Vec<bool>), f64> = BTreeMap::new();
        for term in terms {
            let p = &term.pauli;
            if p.num_qubits() != num_qubits {
                return Err(Error::DimensionMismatch(format!(
                    "{}-qubit term in a {num_qubits}-qubit observable",
                    p.num_qubits()
                )));
            }
            if !p.is_hermitian() {
                return Err(Error::NotHermitian(1.0));
            }
            let sign = if p.phase() == y_count(p) % 4 { 1.0 } else { -1.0 };
            *merged.entry((p.x_bits().to_vec(), p.z_bits().to_vec())).or_default() += sign * term.coeff;
        }
        let terms: Vec<PauliTerm> = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|((x, z), coeff)| {
                let ny = x.iter().zip(&z).filter(|(a, b)| **a && **b).count() as u8;
                PauliTerm { coeff, pauli: PauliString::new(x, z, ny).expect("equal lengths") }
            })
            .collect();
        let locality = terms.iter().map(|t| t.pauli.weight()).max().unwrap_or(0);
        let mut obs = Self {
            num_qubits,
            repr: ObservableRepr::PauliSum(terms),
            locality,
            infinity_norm_bound: 0.0,
        };
        obs.infinity_norm_bound = if num_qubits <= EXACT_NORM_QUBITS {
            let m = obs.to_matrix()?;
            linalg::hermitian_eigenvalues(&m).iter().fold(0.0f64, |a, x| a.max(x.abs()))
        } else {
            obs.terms().iter().map(|t| t.coeff.abs()).sum()
        };
        Ok(obs)
    }

    /// A single Pauli string such as `ZI` or `-XY`.
    pub fn pauli(label: &str) -> Result<Self> {
        Self::weighted(&[(1.0, label)])
    }

    pub fn weighted(terms: &[(f64, &str)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|&(coeff, label)| Ok(PauliTerm { coeff, pauli: PauliString::parse(label)? }))
            .collect::<Result<Vec<_>>>()?;
        let n = parsed.first().map(|t| t.pauli.num_qubits()).ok_or_else(|| Error::invalid("no terms"))?;
        Self::pauli_sum(n, parsed)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn repr(&self) -> &ObservableRepr {
        &self.repr
    }

    pub fn locality(&self) -> usize {
        self.locality
    }

    pub fn infinity_norm_bound(&self) -> f64 {
        self.infinity_norm_bound
    }

    pub fn terms(&self) -> &[PauliTerm] {
        match &self.repr {
            ObservableRepr::PauliSum(t) => t,
            ObservableRepr::Dense(_) => &[],
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        match &self.repr {
            ObservableRepr::Dense(m) => Ok(m.clone()),
            ObservableRepr::PauliSum(terms) => {
                let d = self.dim();
                let mut m = CMatrix::zeros(d, d);
                for t in terms {
                    m += t.pauli.to_matrix()? * C64::new(t.coeff, 0.0);
                }
                Ok(m)
            }
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            ObservableRepr::Dense(m) => linalg::trace(m).re,
            ObservableRepr::PauliSum(terms) => terms
                .iter()
                .filter(|t| t.pauli.is_identity())
                .map(|t| t.coeff * self.dim() as f64)
                .sum(),
        }
    }

    /// `tr(O²)`.
    pub fn trace_sq(&self) -> f64 {
        match &self.repr {
            ObservableRepr::Dense(m) => m.iter().map(|z| z.norm_sqr()).sum(),
            ObservableRepr::PauliSum(terms) => self.dim() as f64 * terms.iter().map(|t| t.coeff * t.coeff).sum::<f64>(),
        }
    }

    /// `tr(O ρ)`.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch("observable and state sizes differ".into()));
        }
        rho.expectation(&self.to_matrix()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_sq_of_z_identity() {
        let o = Observable::pauli("ZI").unwrap();
        assert_eq!(o.trace_sq(), 4.0);
        assert_eq!(o.locality(), 1);
        assert!((o.infinity_norm_bound() - 1.0).abs() < 1e-12);
        let dense = Observable::dense(o.to_matrix().unwrap()).unwrap();
        assert!((dense.trace_sq() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn negative_and_y_terms_merge() {
        let o = Observable::weighted(&[(1.0, "Y"), (0.5, "-Y")]).unwrap();
        assert_eq!(o.terms().len(), 1);
        assert!((o.terms()[0].coeff - 0.5).abs() < 1e-15);
        let y = PauliString::parse("Y").unwrap().to_matrix().unwrap();
        assert!(linalg::max_abs(&(o.to_matrix().unwrap() - y * C64::new(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        assert!(Observable::pauli("iX").is_err());
        let m = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(Observable::dense(m).is_err());
    }
}
