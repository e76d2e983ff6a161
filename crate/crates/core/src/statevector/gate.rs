use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, UNITARY_TOL};

/// A one- or two-qubit unitary. For two-qubit gates the first target is the
/// more significant factor of the 4×4 matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GateMatrix {
    arity: usize,
    matrix: CMatrix,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

impl GateMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let gate = Self::new_unchecked(matrix)?;
        let defect = linalg::unitarity_defect(&gate.matrix);
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(gate)
    }

    /// Shape-checked constructor that skips the unitarity test.
    pub fn new_unchecked(matrix: CMatrix) -> Result<Self> {
        let arity = match (matrix.nrows(), matrix.ncols()) {
            (2, 2) => 1,
            (4, 4) => 2,
            (r, c) => {
                return Err(Error::DimensionMismatch(format!(
                    "gate matrix must be 2x2 or 4x4, got {r}x{c}"
                )))
            }
        };
        Ok(Self { arity, matrix })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn identity(arity: usize) -> Self {
        assert!(arity == 1 || arity == 2);
        Self {
            arity,
            matrix: linalg::identity(1 << arity),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            arity: self.arity,
            matrix: self.matrix.transpose(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            arity: self.arity,
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self · other` (other acts first).
    pub fn compose(&self, other: &GateMatrix) -> Result<Self> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                arity: self.arity,
                targets: other.arity,
            });
        }
        Ok(Self {
            arity: self.arity,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn tensor(&self, other: &GateMatrix) -> Result<Self> {
        if self.arity != 1 || other.arity != 1 {
            return Err(Error::invalid("tensor of gates is only defined for two single-qubit gates"));
        }
        Ok(Self {
            arity: 2,
            matrix: linalg::kron(&self.matrix, &other.matrix),
        })
    }

    pub fn hadamard() -> Self {
        let h = FRAC_1_SQRT_2;
        Self::single([c(h), c(h), c(h), c(-h)])
    }

    pub fn phase_s() -> Self {
        Self::single([c(1.0), c(0.0), c(0.0), C64::new(0.0, 1.0)])
    }

    pub fn pauli_x() -> Self {
        Self::single([c(0.0), c(1.0), c(1.0), c(0.0)])
    }

    pub fn pauli_y() -> Self {
        Self::single([c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)])
    }

    pub fn pauli_z() -> Self {
        Self::single([c(1.0), c(0.0), c(0.0), c(-1.0)])
    }

    /// CNOT with the first target as control.
    pub fn cnot() -> Self {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(1.0);
        m[(1, 1)] = c(1.0);
        m[(2, 3)] = c(1.0);
        m[(3, 2)] = c(1.0);
        Self { arity: 2, matrix: m }
    }

    pub fn swap() -> Self {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(1.0);
        m[(1, 2)] = c(1.0);
        m[(2, 1)] = c(1.0);
        m[(3, 3)] = c(1.0);
        Self { arity: 2, matrix: m }
    }

    fn single(entries: [C64; 4]) -> Self {
        Self {
            arity: 1,
            matrix: CMatrix::from_row_slice(2, 2, &entries),
        }
    }
}
