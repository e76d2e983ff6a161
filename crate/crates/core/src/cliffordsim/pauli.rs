use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::CliffordGate;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::statevector::{shift_of, StateVector};

/// The operator `i^phase · X^x · Z^z` on `n` qubits. `Y` is stored as
/// `x = z = 1` with one extra power of `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    x: Vec<bool>,
    z: Vec<bool>,
    phase: u8,
}

fn dot(a: &[bool], b: &[bool]) -> u32 {
    a.iter().zip(b).filter(|(p, q)| **p && **q).count() as u32
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self { x: vec![false; n], z: vec![false; n], phase: 0 }
    }

    pub fn new(x: Vec<bool>, z: Vec<bool>, phase: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch(format!("x has {} bits, z has {}", x.len(), z.len())));
        }
        Ok(Self { x, z, phase: phase % 4 })
    }

    /// `X^a Z^b`.
    pub fn from_bits(a: &Bits, b: &Bits) -> Result<Self> {
        Self::new(a.to_bools(), b.to_bools(), 0)
    }

    /// Single-qubit `X`, `Y` or `Z` on qubit `q`.
    pub fn single(n: usize, q: usize, letter: char) -> Result<Self> {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, num_qubits: n });
        }
        let mut p = Self::identity(n);
        match letter {
            'X' => p.x[q] = true,
            'Z' => p.z[q] = true,
            'Y' => {
                p.x[q] = true;
                p.z[q] = true;
                p.phase = 1;
            }
            'I' => {}
            _ => return Err(Error::invalid(format!("unknown Pauli letter `{letter}`"))),
        }
        Ok(p)
    }

    /// Parses labels such as `XZ`, `-iYI`, `+IXY`.
    pub fn parse(label: &str) -> Result<Self> {
        let (mut phase, rest) = if let Some(r) = label.strip_prefix("+i") {
            (1u8, r)
        } else if let Some(r) = label.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = label.strip_prefix('i') {
            (1, r)
        } else if let Some(r) = label.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = label.strip_prefix('-') {
            (2, r)
        } else {
            (0, label)
        };
        if rest.is_empty() {
            return Err(Error::invalid("empty Pauli label"));
        }
        let n = rest.chars().count();
        let mut p = Self::identity(n);
        for (q, c) in rest.chars().enumerate() {
            match c {
                'I' => {}
                'X' => p.x[q] = true,
                'Z' => p.z[q] = true,
                'Y' => {
                    p.x[q] = true;
                    p.z[q] = true;
                    phase += 1;
                }
                _ => return Err(Error::invalid(format!("unknown Pauli letter `{c}` in `{label}`"))),
            }
        }
        p.phase = phase % 4;
        Ok(p)
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x_bits(&self) -> &[bool] {
        &self.x
    }

    pub fn z_bits(&self) -> &[bool] {
        &self.z
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn phase_factor(&self) -> C64 {
        [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][self.phase as usize]
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    pub fn factor(&self, q: usize) -> (bool, bool) {
        (self.x[q], self.z[q])
    }

    pub fn is_identity(&self) -> bool {
        !self.x.iter().chain(&self.z).any(|&b| b)
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).filter(|(a, b)| **a || **b).count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.num_qubits()).filter(|&q| self.x[q] || self.z[q]).collect()
    }

    fn ny(&self) -> u32 {
        dot(&self.x, &self.z)
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase as u32 % 2 == self.ny() % 2
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        (dot(&self.x, &other.z) + dot(&self.z, &other.x)) % 2 == 0
    }

    fn check_size(&self, other: &PauliString) -> Result<()> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "{}- and {}-qubit Pauli strings",
                self.num_qubits(),
                other.num_qubits()
            )));
        }
        Ok(())
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        self.check_size(other)?;
        let phase = (self.phase as u32 + other.phase as u32 + 2 * dot(&self.z, &other.x)) % 4;
        Ok(PauliString {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
            phase: phase as u8,
        })
    }

    pub fn dagger(&self) -> PauliString {
        let phase = (4 - self.phase as u32 + 2 * self.ny()) % 4;
        PauliString { x: self.x.clone(), z: self.z.clone(), phase: phase as u8 }
    }

    /// Transpose in the computational basis.
    pub fn transpose(&self) -> PauliString {
        let phase = (self.phase as u32 + 2 * self.ny()) % 4;
        PauliString { x: self.x.clone(), z: self.z.clone(), phase: phase as u8 }
    }

    /// Replaces `self` by `G · self · G†`.
    pub fn conjugate_gate(&mut self, gate: &CliffordGate) -> Result<()> {
        let n = self.num_qubits();
        for q in gate.qubits() {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, num_qubits: n });
            }
        }
        match *gate {
            CliffordGate::H(q) => {
                if self.x[q] && self.z[q] {
                    self.phase = (self.phase + 2) % 4;
                }
                std::mem::swap(&mut self.x[q], &mut self.z[q]);
            }
            CliffordGate::S(q) => {
                if self.x[q] {
                    self.z[q] = !self.z[q];
                    self.phase = (self.phase + 1) % 4;
                }
            }
            CliffordGate::CX(c, t) => {
                self.x[t] ^= self.x[c];
                self.z[c] ^= self.z[t];
            }
        }
        Ok(())
    }

    /// Applies the operator to the listed qubits of `state`; qubit `i` of the
    /// string acts on `qubits[i]`.
    pub fn apply_to_state(&self, state: &mut StateVector, qubits: &[usize]) -> Result<()> {
        if qubits.len() != self.num_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit Pauli string on {} qubits",
                self.num_qubits(),
                qubits.len()
            )));
        }
        state.validate_targets(qubits)?;
        let m = state.num_qubits();
        let mut xmask = 0usize;
        let mut zmask = 0usize;
        for (i, &q) in qubits.iter().enumerate() {
            if self.x[i] {
                xmask |= 1 << shift_of(m, q);
            }
            if self.z[i] {
                zmask |= 1 << shift_of(m, q);
            }
        }
        let factor = self.phase_factor();
        let amps = state.amplitudes();
        let out: Vec<C64> = (0..amps.len())
            .map(|idx| {
                let src = idx ^ xmask;
                let sign = if (src & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                amps[src] * factor * sign
            })
            .collect();
        *state = StateVector::from_amplitudes(out)?;
        Ok(())
    }

    /// Dense matrix `i^phase ⊗_q X^{x_q} Z^{z_q}`.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.num_qubits();
        if n > 10 {
            return Err(Error::TooManyQubits { requested: n, limit: 10 });
        }
        let dim = 1usize << n;
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut s = StateVector::basis(n, col)?;
            self.apply_to_state(&mut s, &(0..n).collect::<Vec<_>>())?;
            for (row, a) in s.amplitudes().iter().enumerate() {
                m[(row, col)] = *a;
            }
        }
        Ok(m)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coeff = (self.phase as i64 - self.ny() as i64).rem_euclid(4);
        f.write_str(["+", "+i", "-", "-i"][coeff as usize])?;
        for (x, z) in self.x.iter().zip(&self.z) {
            f.write_str(match (x, z) {
                (false, false) => "I",
                (true, false) => "X",
                (false, true) => "Z",
                (true, true) => "Y",
            })?;
        }
        Ok(())
    }
}
