//! Recorded circuit programs: brickwork layers interleaved with Pauli
//! byproducts, and their collapse into a single brickwork circuit.

use num_complex::Complex64 as C64;

use crate::cliffordsim::PauliString;
use crate::ensembles::{BrickLayer, BrickworkCircuit};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::statevector::{GateMatrix, StateVector};

#[derive(Clone, Debug, PartialEq)]
pub enum ProgramStep {
    Layer(BrickLayer),
    Pauli(PauliString),
}

/// Steps in time order acting on an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveProgram {
    num_qubits: usize,
    steps: Vec<ProgramStep>,
}

/// A program folded into one brickwork circuit followed by a Pauli that no
/// gate could absorb (including the global phase).
#[derive(Clone, Debug, PartialEq)]
pub struct CollapsedProgram {
    pub circuit: BrickworkCircuit,
    pub residual: PauliString,
}

impl EffectiveProgram {
    pub fn new(num_qubits: usize) -> Self {
        Self { num_qubits, steps: Vec::new() }
    }

    pub fn from_brickwork(circuit: &BrickworkCircuit) -> Self {
        Self {
            num_qubits: circuit.num_qubits(),
            steps: circuit.layers().iter().cloned().map(ProgramStep::Layer).collect(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn steps(&self) -> &[ProgramStep] {
        &self.steps
    }

    pub fn push_pauli(&mut self, p: PauliString) -> Result<()> {
        if p.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch("Pauli size differs from program size".into()));
        }
        self.steps.push(ProgramStep::Pauli(p));
        Ok(())
    }

    pub fn push_layer(&mut self, layer: BrickLayer) {
        self.steps.push(ProgramStep::Layer(layer));
    }

    /// `other` after `self`.
    pub fn then(&self, other: &EffectiveProgram) -> Result<EffectiveProgram> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch("programs on different qubit counts".into()));
        }
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        Ok(Self { num_qubits: self.num_qubits, steps })
    }

    /// Computational-basis transpose of the whole program.
    pub fn transpose(&self) -> EffectiveProgram {
        let steps = self
            .steps
            .iter()
            .rev()
            .map(|s| match s {
                ProgramStep::Layer(l) => ProgramStep::Layer(l.transpose()),
                ProgramStep::Pauli(p) => ProgramStep::Pauli(p.transpose()),
            })
            .collect();
        Self { num_qubits: self.num_qubits, steps }
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        let qubits: Vec<usize> = (0..self.num_qubits).collect();
        if state.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch("program and state sizes differ".into()));
        }
        for step in &self.steps {
            match step {
                ProgramStep::Layer(l) => l.apply(state, 0)?,
                ProgramStep::Pauli(p) => p.apply_to_state(state, &qubits)?,
            }
        }
        Ok(())
    }

    pub fn unitary(&self) -> Result<CMatrix> {
        let dim = 1usize << self.num_qubits;
        let mut u = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut s = StateVector::basis(self.num_qubits, col)?;
            self.apply(&mut s)?;
            for (row, a) in s.amplitudes().iter().enumerate() {
                u[(row, col)] = *a;
            }
        }
        Ok(u)
    }

    /// Absorbs every Pauli into a neighbouring gate and merges adjacent
    /// layers of equal parity. Applying the result reproduces the program
    /// exactly, global phase included.
    pub fn collapse(&self) -> Result<CollapsedProgram> {
        let n = self.num_qubits;
        let mut out: Vec<BrickLayer> = Vec::new();
        let mut pending = PauliString::identity(n);
        for step in &self.steps {
            match step {
                ProgramStep::Pauli(p) => pending = p.mul(&pending)?,
                ProgramStep::Layer(layer) => {
                    let mut layer = layer.clone();
                    for placement in layer.placements_mut() {
                        let (a, b) = placement.qubits;
                        if let Some(f) = take_pair_factor(&mut pending, a, b) {
                            placement.gate = placement.gate.compose(&f)?;
                        }
                    }
                    match out.last_mut() {
                        Some(last) if last.parity() == layer.parity() => *last = last.followed_by(&layer)?,
                        _ => out.push(layer),
                    }
                }
            }
        }
        for q in 0..n {
            let (x, z) = pending.factor(q);
            if !x && !z {
                continue;
            }
            let Some(layer) = out
                .iter_mut()
                .rev()
                .find(|l| l.placements().iter().any(|p| p.qubits.0 == q || p.qubits.1 == q))
            else {
                continue;
            };
            let placement = layer
                .placements_mut()
                .iter_mut()
                .find(|p| p.qubits.0 == q || p.qubits.1 == q)
                .expect("layer covers q");
            let f = take_qubit_factor(&mut pending, q, placement.qubits);
            placement.gate = f.compose(&placement.gate)?;
        }
        let first_parity = out.first().map_or(0, BrickLayer::parity);
        Ok(CollapsedProgram {
            circuit: BrickworkCircuit::from_layers(n, first_parity, out)?,
            residual: pending,
        })
    }

    /// Depth of the collapsed brickwork circuit.
    pub fn effective_depth(&self) -> Result<usize> {
        Ok(self.collapse()?.circuit.depth())
    }
}

impl CollapsedProgram {
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        self.circuit.apply(state)?;
        let qubits: Vec<usize> = (0..self.circuit.num_qubits()).collect();
        self.residual.apply_to_state(state, &qubits)
    }

    /// True when nothing but a global phase is left outside the circuit.
    pub fn fully_absorbed(&self) -> bool {
        self.residual.is_identity()
    }
}

fn single_factor(x: bool, z: bool) -> CMatrix {
    let c = |re: f64| C64::new(re, 0.0);
    let xm = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let zm = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    let mut m = linalg::identity(2);
    if x {
        m = &m * &xm;
    }
    if z {
        m = &m * &zm;
    }
    m
}

/// Removes the tensor factors on qubits `a`, `b` from `p` and returns them
/// as a two-qubit gate; `None` if both factors are trivial.
fn take_pair_factor(p: &mut PauliString, a: usize, b: usize) -> Option<GateMatrix> {
    let (xa, za) = p.factor(a);
    let (xb, zb) = p.factor(b);
    if !(xa || za || xb || zb) {
        return None;
    }
    let mut x = p.x_bits().to_vec();
    let mut z = p.z_bits().to_vec();
    x[a] = false;
    z[a] = false;
    x[b] = false;
    z[b] = false;
    *p = PauliString::new(x, z, p.phase()).expect("same length");
    let m = linalg::kron(&single_factor(xa, za), &single_factor(xb, zb));
    Some(GateMatrix::new_unchecked(m).expect("4x4"))
}

/// Removes the factor on `q` from `p` and returns it embedded in the
/// two-qubit gate acting on `pair`.
fn take_qubit_factor(p: &mut PauliString, q: usize, pair: (usize, usize)) -> GateMatrix {
    let (xq, zq) = p.factor(q);
    let mut x = p.x_bits().to_vec();
    let mut z = p.z_bits().to_vec();
    x[q] = false;
    z[q] = false;
    *p = PauliString::new(x, z, p.phase()).expect("same length");
    let f = single_factor(xq, zq);
    let m = if pair.0 == q { linalg::kron(&f, &linalg::identity(2)) } else { linalg::kron(&linalg::identity(2), &f) };
    GateMatrix::new_unchecked(m).expect("4x4")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::build_brickwork_with_parity;
    use crate::rng;
    use rand::Rng;

    fn random_pauli(n: usize, r: &mut impl Rng) -> PauliString {
        let x = (0..n).map(|_| r.random()).collect();
        let z = (0..n).map(|_| r.random()).collect();
        PauliString::new(x, z, r.random_range(0..4)).unwrap()
    }

    #[test]
    fn collapse_is_exact() {
        let mut r = rng::from_seed(51);
        for n in 2..=5 {
            for _ in 0..10 {
                let u = build_brickwork_with_parity(n, r.random_range(0..4), r.random_range(0..2), &mut r).unwrap();
                let v = build_brickwork_with_parity(n, r.random_range(0..4), r.random_range(0..2), &mut r).unwrap();
                let mut prog = EffectiveProgram::new(n);
                prog.push_pauli(random_pauli(n, &mut r)).unwrap();
                let prog = prog.then(&EffectiveProgram::from_brickwork(&u).transpose()).unwrap();
                let mut prog = prog;
                prog.push_pauli(random_pauli(n, &mut r)).unwrap();
                let mut prog = prog.then(&EffectiveProgram::from_brickwork(&v)).unwrap();
                prog.push_pauli(random_pauli(n, &mut r)).unwrap();
                let collapsed = prog.collapse().unwrap();
                let lhs = prog.unitary().unwrap();
                let mut rhs = CMatrix::zeros(1 << n, 1 << n);
                for col in 0..1 << n {
                    let mut s = StateVector::basis(n, col).unwrap();
                    collapsed.apply(&mut s).unwrap();
                    for (row, a) in s.amplitudes().iter().enumerate() {
                        rhs[(row, col)] = *a;
                    }
                }
                assert!(linalg::max_abs(&(lhs - rhs)) < 1e-12);
                let d1 = u.depth();
                let d2 = v.depth();
                let depth = collapsed.circuit.depth();
                if d1 > 0 && d2 > 0 {
                    assert!(depth == d1 + d2 || depth == d1 + d2 - 1, "{d1} {d2} {depth}");
                }
                let covered: Vec<usize> = collapsed
                    .circuit
                    .layers()
                    .iter()
                    .flat_map(|l| l.placements().iter().flat_map(|p| [p.qubits.0, p.qubits.1]))
                    .collect();
                assert!(collapsed.residual.support().iter().all(|q| !covered.contains(q)));
            }
        }
    }

    #[test]
    fn junction_parity_decides_merge() {
        let mut r = rng::from_seed(52);
        let u = build_brickwork_with_parity(4, 3, 0, &mut r).unwrap();
        let v_same = build_brickwork_with_parity(4, 2, 0, &mut r).unwrap();
        let v_diff = build_brickwork_with_parity(4, 2, 1, &mut r).unwrap();
        // U^T starts with U's last layer (parity 0) and ends with parity 0.
        let ut = EffectiveProgram::from_brickwork(&u).transpose();
        assert_eq!(ut.then(&EffectiveProgram::from_brickwork(&v_same)).unwrap().effective_depth().unwrap(), 4);
        assert_eq!(ut.then(&EffectiveProgram::from_brickwork(&v_diff)).unwrap().effective_depth().unwrap(), 5);
    }
}
