use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::PauliString;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::statevector::{GateMatrix, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    /// Control first, target second.
    CX(usize, usize),
}

impl CliffordGate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            CliffordGate::H(q) | CliffordGate::S(q) => vec![q],
            CliffordGate::CX(c, t) => vec![c, t],
        }
    }

    /// Gates whose product in time order is the inverse.
    pub fn inverse(&self) -> Vec<CliffordGate> {
        match *self {
            CliffordGate::S(q) => vec![CliffordGate::S(q); 3],
            g => vec![g],
        }
    }

    pub fn matrix(&self) -> GateMatrix {
        match self {
            CliffordGate::H(_) => GateMatrix::hadamard(),
            CliffordGate::S(_) => GateMatrix::phase_s(),
            CliffordGate::CX(..) => GateMatrix::cnot(),
        }
    }

    pub fn shifted(&self, offset: usize) -> CliffordGate {
        match *self {
            CliffordGate::H(q) => CliffordGate::H(q + offset),
            CliffordGate::S(q) => CliffordGate::S(q + offset),
            CliffordGate::CX(c, t) => CliffordGate::CX(c + offset, t + offset),
        }
    }
}

/// A layered circuit over `{H, S, CX}`; gates within a layer act on
/// disjoint qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordCircuit {
    num_qubits: usize,
    layers: Vec<Vec<CliffordGate>>,
}

impl CliffordCircuit {
    pub fn new(num_qubits: usize) -> Self {
        Self { num_qubits, layers: Vec::new() }
    }

    pub fn from_layers(num_qubits: usize, layers: Vec<Vec<CliffordGate>>) -> Result<Self> {
        let mut c = Self::new(num_qubits);
        for layer in layers {
            c.push_layer(layer)?;
        }
        Ok(c)
    }

    /// Packs a gate sequence into layers as early as possible.
    pub fn from_gates(num_qubits: usize, gates: &[CliffordGate]) -> Result<Self> {
        let mut layers: Vec<Vec<CliffordGate>> = Vec::new();
        let mut next_free = vec![0usize; num_qubits];
        for g in gates {
            let qs = g.qubits();
            validate_gate(num_qubits, &qs)?;
            let slot = qs.iter().map(|&q| next_free[q]).max().unwrap_or(0);
            if slot == layers.len() {
                layers.push(Vec::new());
            }
            layers[slot].push(*g);
            for q in qs {
                next_free[q] = slot + 1;
            }
        }
        Ok(Self { num_qubits, layers })
    }

    pub fn identity(num_qubits: usize, depth: usize) -> Self {
        Self { num_qubits, layers: vec![Vec::new(); depth] }
    }

    pub fn push_layer(&mut self, layer: Vec<CliffordGate>) -> Result<()> {
        let mut used = vec![false; self.num_qubits];
        for g in &layer {
            let qs = g.qubits();
            validate_gate(self.num_qubits, &qs)?;
            for q in qs {
                if used[q] {
                    return Err(Error::DuplicateQubit(q));
                }
                used[q] = true;
            }
        }
        self.layers.push(layer);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<CliffordGate>] {
        &self.layers
    }

    pub fn gates(&self) -> impl Iterator<Item = &CliffordGate> {
        self.layers.iter().flatten()
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// `other` applied after `self`.
    pub fn then(&self, other: &CliffordCircuit) -> Result<CliffordCircuit> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch("circuits on different qubit counts".into()));
        }
        let mut layers = self.layers.clone();
        layers.extend(other.layers.iter().cloned());
        Ok(Self { num_qubits: self.num_qubits, layers })
    }

    pub fn inverse(&self) -> CliffordCircuit {
        let gates: Vec<CliffordGate> = self
            .layers
            .iter()
            .rev()
            .flat_map(|l| l.iter().flat_map(CliffordGate::inverse))
            .collect();
        Self::from_gates(self.num_qubits, &gates).expect("inverse of a valid circuit is valid")
    }

    /// `C^T`. Every generator is symmetric, so only the order reverses.
    pub fn transpose(&self) -> CliffordCircuit {
        Self { num_qubits: self.num_qubits, layers: self.layers.iter().rev().cloned().collect() }
    }

    /// Layers `[start, end)` as a circuit.
    pub fn slice(&self, start: usize, end: usize) -> CliffordCircuit {
        let end = end.min(self.depth());
        let start = start.min(end);
        Self { num_qubits: self.num_qubits, layers: self.layers[start..end].to_vec() }
    }

    pub fn padded_to(&self, depth: usize) -> CliffordCircuit {
        let mut c = self.clone();
        while c.layers.len() < depth {
            c.layers.push(Vec::new());
        }
        c
    }

    /// Splits into `k` contiguous chunks of `⌈t/k⌉` layers, padding the short
    /// ones with identity layers.
    pub fn split_segments(&self, k: usize) -> Result<Vec<CliffordCircuit>> {
        if k == 0 {
            return Err(Error::invalid("cannot split into zero segments"));
        }
        let chunk = self.depth().div_ceil(k);
        Ok((0..k)
            .map(|i| self.slice(i * chunk, (i + 1) * chunk).padded_to(chunk))
            .collect())
    }

    /// `C P C†` by gate-by-gate Heisenberg propagation.
    pub fn conjugate_pauli(&self, p: &PauliString) -> Result<PauliString> {
        if p.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit Pauli through a {}-qubit circuit",
                p.num_qubits(),
                self.num_qubits
            )));
        }
        let mut out = p.clone();
        for g in self.gates() {
            out.conjugate_gate(g)?;
        }
        Ok(out)
    }

    /// Applies the circuit to qubits `offset..offset+n` of `state`.
    pub fn apply_to_state(&self, state: &mut StateVector, offset: usize) -> Result<()> {
        if offset + self.num_qubits > state.num_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit circuit at offset {offset} on a {}-qubit state",
                self.num_qubits,
                state.num_qubits()
            )));
        }
        for g in self.gates() {
            let targets: Vec<usize> = g.qubits().iter().map(|q| q + offset).collect();
            state.apply_gate(&g.matrix(), &targets)?;
        }
        Ok(())
    }

    pub fn unitary(&self) -> Result<CMatrix> {
        if self.num_qubits > 10 {
            return Err(Error::TooManyQubits { requested: self.num_qubits, limit: 10 });
        }
        let dim = 1usize << self.num_qubits;
        let mut u = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut s = StateVector::basis(self.num_qubits, col)?;
            self.apply_to_state(&mut s, 0)?;
            for (row, a) in s.amplitudes().iter().enumerate() {
                u[(row, col)] = *a;
            }
        }
        Ok(u)
    }

    /// Text form: `qubits N`, one gate per line, each layer closed by `---`.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.num_qubits);
        for layer in &self.layers {
            for g in layer {
                match g {
                    CliffordGate::H(q) => writeln!(out, "H {q}"),
                    CliffordGate::S(q) => writeln!(out, "S {q}"),
                    CliffordGate::CX(c, t) => writeln!(out, "CX {c} {t}"),
                }
                .unwrap();
            }
            out.push_str("---\n");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut circuit: Option<CliffordCircuit> = None;
        let mut current: Vec<CliffordGate> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad integer `{s}`")));
            let Some(c) = circuit.as_mut() else {
                if fields.len() == 2 && fields[0] == "qubits" {
                    circuit = Some(CliffordCircuit::new(num(fields[1])?));
                    continue;
                }
                return Err(err("expected `qubits N` header".into()));
            };
            let gate = match fields.as_slice() {
                ["---"] => {
                    c.push_layer(std::mem::take(&mut current)).map_err(|e| err(e.to_string()))?;
                    continue;
                }
                ["H", q] => CliffordGate::H(num(q)?),
                ["S", q] => CliffordGate::S(num(q)?),
                ["CX", a, b] => CliffordGate::CX(num(a)?, num(b)?),
                _ => return Err(err(format!("unrecognized line `{line}`"))),
            };
            current.push(gate);
        }
        let mut c = circuit.ok_or(Error::Parse { line: 0, message: "missing `qubits N` header".into() })?;
        if !current.is_empty() {
            c.push_layer(current)?;
        }
        Ok(c)
    }
}

fn validate_gate(n: usize, qubits: &[usize]) -> Result<()> {
    for &q in qubits {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, num_qubits: n });
        }
    }
    if qubits.len() == 2 && qubits[0] == qubits[1] {
        return Err(Error::DuplicateQubit(qubits[0]));
    }
    Ok(())
}

/// A depth-`depth` circuit where each layer pairs randomly chosen qubits
/// with CX gates and fills the rest with random `H`/`S`/idle slots. Every
/// layer carries at least one gate.
pub fn random_layered_clifford<R: Rng + ?Sized>(n: usize, depth: usize, rng: &mut R) -> CliffordCircuit {
    let mut c = CliffordCircuit::new(n);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..depth {
        loop {
            order.shuffle(rng);
            let mut layer = Vec::new();
            let mut i = 0;
            while i < n {
                if i + 1 < n && rng.random_bool(0.5) {
                    layer.push(CliffordGate::CX(order[i], order[i + 1]));
                    i += 2;
                    continue;
                }
                match rng.random_range(0..3) {
                    0 => layer.push(CliffordGate::H(order[i])),
                    1 => layer.push(CliffordGate::S(order[i])),
                    _ => {}
                }
                i += 1;
            }
            if !layer.is_empty() {
                c.push_layer(layer).expect("disjoint by construction");
                break;
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::rng;
    use num_complex::Complex64 as C64;

    #[test]
    fn generator_relations() {
        let mut h = CliffordCircuit::new(1);
        h.push_layer(vec![CliffordGate::H(0)]).unwrap();
        assert_eq!(h.conjugate_pauli(&PauliString::parse("X").unwrap()).unwrap(), PauliString::parse("Z").unwrap());
        let mut s = CliffordCircuit::new(1);
        s.push_layer(vec![CliffordGate::S(0)]).unwrap();
        assert_eq!(s.conjugate_pauli(&PauliString::parse("X").unwrap()).unwrap(), PauliString::parse("Y").unwrap());
        let mut cx = CliffordCircuit::new(2);
        cx.push_layer(vec![CliffordGate::CX(0, 1)]).unwrap();
        assert_eq!(
            cx.conjugate_pauli(&PauliString::parse("XI").unwrap()).unwrap(),
            PauliString::parse("XX").unwrap()
        );
    }

    #[test]
    fn conjugation_matches_dense() {
        let mut r = rng::from_seed(21);
        for n in 1..=4 {
            for _ in 0..100 {
                let c = random_layered_clifford(n, 5, &mut r);
                let u = c.unitary().unwrap();
                let x: Vec<bool> = (0..n).map(|_| r.random()).collect();
                let z: Vec<bool> = (0..n).map(|_| r.random()).collect();
                let p = PauliString::new(x, z, r.random_range(0..4)).unwrap();
                let q = c.conjugate_pauli(&p).unwrap();
                let dense = &u * p.to_matrix().unwrap() * u.adjoint();
                assert!(linalg::max_abs(&(dense - q.to_matrix().unwrap())) < 1e-10);
            }
        }
    }

    #[test]
    fn inverse_and_transpose() {
        let mut r = rng::from_seed(22);
        let c = random_layered_clifford(3, 6, &mut r);
        let u = c.unitary().unwrap();
        let prod = c.inverse().unitary().unwrap() * &u;
        assert!(linalg::max_abs(&(prod - linalg::identity(8))) < 1e-12);
        assert!(linalg::max_abs(&(c.transpose().unitary().unwrap() - u.transpose())) < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let mut r = rng::from_seed(23);
        let c = random_layered_clifford(4, 5, &mut r).then(&CliffordCircuit::identity(4, 2)).unwrap();
        let back = CliffordCircuit::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
        let text = "# bell\nqubits 2\nH 0\n---\nCX 0 1\n";
        let bell = CliffordCircuit::parse(text).unwrap();
        assert_eq!(bell.depth(), 2);
        let mut s = StateVector::zero(2).unwrap();
        bell.apply_to_state(&mut s, 0).unwrap();
        assert!((s.amplitude(3) - C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn parse_errors() {
        assert!(CliffordCircuit::parse("H 0\n").is_err());
        assert!(CliffordCircuit::parse("qubits 2\nH 2\n").is_err());
        assert!(CliffordCircuit::parse("qubits 2\nH 0\nS 0\n").is_err());
        assert!(CliffordCircuit::parse("qubits 2\nT 0\n").is_err());
        assert!(CliffordCircuit::parse("qubits 2\nCX 1 1\n").is_err());
    }

    #[test]
    fn segments_cover_circuit() {
        let mut r = rng::from_seed(24);
        let c = random_layered_clifford(3, 7, &mut r);
        let segs = c.split_segments(3).unwrap();
        assert_eq!(segs.len(), 3);
        assert!(segs.iter().all(|s| s.depth() == 3));
        let mut joined = CliffordCircuit::new(3);
        for s in &segs {
            joined = joined.then(s).unwrap();
        }
        assert!(linalg::max_abs(&(joined.unitary().unwrap() - c.unitary().unwrap())) < 1e-12);
    }
}
