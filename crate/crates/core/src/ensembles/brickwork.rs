use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use rand::Rng;

use super::sample_haar_su4;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::statevector::{GateMatrix, StateVector};

/// Pairs `(j, j+1)` touched by a layer of the given parity on `m` qubits.
pub fn layer_pairs(m: usize, parity: u8) -> Vec<(usize, usize)> {
    (parity as usize..m.saturating_sub(1))
        .step_by(2)
        .map(|j| (j, j + 1))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GatePlacement {
    pub qubits: (usize, usize),
    pub gate: GateMatrix,
}

/// One brickwork layer: a gate on every pair of its parity.
#[derive(Clone, Debug, PartialEq)]
pub struct BrickLayer {
    parity: u8,
    placements: Vec<GatePlacement>,
}

impl BrickLayer {
    pub fn new(m: usize, parity: u8, gates: Vec<GateMatrix>) -> Result<Self> {
        if parity > 1 {
            return Err(Error::invalid("layer parity must be 0 or 1"));
        }
        let pairs = layer_pairs(m, parity);
        if pairs.len() != gates.len() {
            return Err(Error::DimensionMismatch(format!(
                "layer of parity {parity} on {m} qubits needs {} gates, got {}",
                pairs.len(),
                gates.len()
            )));
        }
        let placements = pairs
            .into_iter()
            .zip(gates)
            .map(|(qubits, gate)| {
                if gate.arity() != 2 {
                    return Err(Error::ArityMismatch { arity: gate.arity(), targets: 2 });
                }
                Ok(GatePlacement { qubits, gate })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { parity, placements })
    }

    pub fn identity(m: usize, parity: u8) -> Self {
        let gates = vec![GateMatrix::identity(2); layer_pairs(m, parity).len()];
        Self::new(m, parity, gates).expect("identity layer is well formed")
    }

    pub fn random<R: Rng + ?Sized>(m: usize, parity: u8, rng: &mut R) -> Self {
        let gates = layer_pairs(m, parity).iter().map(|_| sample_haar_su4(rng)).collect();
        Self::new(m, parity, gates).expect("random layer is well formed")
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn placements(&self) -> &[GatePlacement] {
        &self.placements
    }

    pub(crate) fn placements_mut(&mut self) -> &mut [GatePlacement] {
        &mut self.placements
    }

    pub fn transpose(&self) -> Self {
        Self {
            parity: self.parity,
            placements: self
                .placements
                .iter()
                .map(|p| GatePlacement { qubits: p.qubits, gate: p.gate.transpose() })
                .collect(),
        }
    }

    /// `other · self`: both layers share the parity, so gates multiply pairwise.
    pub fn followed_by(&self, other: &BrickLayer) -> Result<Self> {
        if self.parity != other.parity || self.placements.len() != other.placements.len() {
            return Err(Error::invalid("only layers of equal parity can be merged"));
        }
        let placements = self
            .placements
            .iter()
            .zip(&other.placements)
            .map(|(a, b)| Ok(GatePlacement { qubits: a.qubits, gate: b.gate.compose(&a.gate)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { parity: self.parity, placements })
    }

    pub fn apply(&self, state: &mut StateVector, offset: usize) -> Result<()> {
        for p in &self.placements {
            state.apply_gate(&p.gate, &[p.qubits.0 + offset, p.qubits.1 + offset])?;
        }
        Ok(())
    }
}

/// A staggered circuit of two-qubit gates on a line of qubits with open ends.
#[derive(Clone, Debug, PartialEq)]
pub struct BrickworkCircuit {
    num_qubits: usize,
    first_parity: u8,
    layers: Vec<BrickLayer>,
}

impl BrickworkCircuit {
    pub fn from_layers(num_qubits: usize, first_parity: u8, layers: Vec<BrickLayer>) -> Result<Self> {
        if num_qubits < 2 {
            return Err(Error::invalid("a brickwork circuit needs at least two qubits"));
        }
        if first_parity > 1 {
            return Err(Error::invalid("first parity must be 0 or 1"));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.parity as usize != (first_parity as usize + i) % 2 {
                return Err(Error::invalid(format!("layer {i} breaks the parity alternation")));
            }
            if layer.placements.len() != layer_pairs(num_qubits, layer.parity).len()
                || layer.placements.iter().any(|p| p.qubits.1 >= num_qubits)
            {
                return Err(Error::DimensionMismatch(format!("layer {i} does not fit {num_qubits} qubits")));
            }
        }
        Ok(Self { num_qubits, first_parity, layers })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn first_parity(&self) -> u8 {
        self.first_parity
    }

    pub fn layers(&self) -> &[BrickLayer] {
        &self.layers
    }

    /// Idealized volume `⌊m/2⌋·d`.
    pub fn declared_volume(&self) -> usize {
        declared_volume(self.num_qubits, self.depth())
    }

    /// Number of gates actually placed.
    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.placements.len()).sum()
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        self.apply_at(state, 0)
    }

    /// Applies the circuit to qubits `offset..offset+m` of `state`.
    pub fn apply_at(&self, state: &mut StateVector, offset: usize) -> Result<()> {
        if offset + self.num_qubits > state.num_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit circuit at offset {offset} on a {}-qubit state",
                self.num_qubits,
                state.num_qubits()
            )));
        }
        for layer in &self.layers {
            layer.apply(state, offset)?;
        }
        Ok(())
    }

    /// `U^T`: layers reversed with every gate transposed.
    pub fn transpose(&self) -> Self {
        let layers: Vec<BrickLayer> = self.layers.iter().rev().map(BrickLayer::transpose).collect();
        let first_parity = layers.first().map_or(self.first_parity, |l| l.parity);
        Self { num_qubits: self.num_qubits, first_parity, layers }
    }

    /// Dense `2^m × 2^m` matrix of the circuit.
    pub fn unitary(&self) -> Result<CMatrix> {
        if self.num_qubits > 12 {
            return Err(Error::TooManyQubits { requested: self.num_qubits, limit: 12 });
        }
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

    /// Text record: a `brickwork <m> <d> <first_parity>` header, then one
    /// `gate <layer> <j> <32 reals>` line per gate (row-major, re/im pairs).
    pub fn to_record(&self) -> String {
        let mut out = format!("brickwork {} {} {}\n", self.num_qubits, self.depth(), self.first_parity);
        for (li, layer) in self.layers.iter().enumerate() {
            for p in &layer.placements {
                write!(out, "gate {} {}", li, p.qubits.0).unwrap();
                let m = p.gate.matrix();
                for r in 0..4 {
                    for c in 0..4 {
                        write!(out, " {:.17e} {:.17e}", m[(r, c)].re, m[(r, c)].im).unwrap();
                    }
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let parse_err = |line: usize, message: &str| Error::Parse { line: line + 1, message: message.into() };
        let (hl, header) = lines.next().ok_or_else(|| parse_err(0, "empty record"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != "brickwork" {
            return Err(parse_err(hl, "expected `brickwork <m> <d> <parity>`"));
        }
        let num = |s: &str, line: usize| s.parse::<usize>().map_err(|_| parse_err(line, "bad integer"));
        let m = num(h[1], hl)?;
        let d = num(h[2], hl)?;
        let parity = num(h[3], hl)? as u8;
        if m < 2 || parity > 1 {
            return Err(parse_err(hl, "invalid header values"));
        }
        let mut gates: Vec<Vec<(usize, GateMatrix)>> = vec![Vec::new(); d];
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 35 || f[0] != "gate" {
                return Err(parse_err(ln, "expected `gate <layer> <j>` and 32 reals"));
            }
            let layer = num(f[1], ln)?;
            let j = num(f[2], ln)?;
            if layer >= d {
                return Err(parse_err(ln, "layer index beyond depth"));
            }
            let vals = f[3..]
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| parse_err(ln, "bad real")))
                .collect::<Result<Vec<_>>>()?;
            let entries: Vec<C64> = vals.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
            let gate = GateMatrix::new(CMatrix::from_row_slice(4, 4, &entries))
                .map_err(|e| parse_err(ln, &e.to_string()))?;
            gates[layer].push((j, gate));
        }
        let layers = gates
            .into_iter()
            .enumerate()
            .map(|(i, mut g)| {
                g.sort_by_key(|(j, _)| *j);
                let p = ((parity as usize + i) % 2) as u8;
                let expected: Vec<usize> = layer_pairs(m, p).iter().map(|q| q.0).collect();
                let got: Vec<usize> = g.iter().map(|(j, _)| *j).collect();
                if expected != got {
                    return Err(Error::Parse { line: 0, message: format!("layer {i} has wrong gate positions") });
                }
                BrickLayer::new(m, p, g.into_iter().map(|(_, gate)| gate).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_layers(m, parity, layers)
    }
}

pub fn declared_volume(m: usize, d: usize) -> usize {
    (m / 2) * d
}

pub fn build_brickwork<R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> Result<BrickworkCircuit> {
    build_brickwork_with_parity(m, d, 0, rng)
}

/// Brickwork circuit whose first layer has the given parity.
pub fn build_brickwork_with_parity<R: Rng + ?Sized>(
    m: usize,
    d: usize,
    first_parity: u8,
    rng: &mut R,
) -> Result<BrickworkCircuit> {
    if m < 2 {
        return Err(Error::invalid(format!("brickwork circuits need m >= 2, got {m}")));
    }
    if first_parity > 1 {
        return Err(Error::invalid("first parity must be 0 or 1"));
    }
    let layers = (0..d)
        .map(|i| BrickLayer::random(m, ((first_parity as usize + i) % 2) as u8, rng))
        .collect();
    BrickworkCircuit::from_layers(m, first_parity, layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::rng;

    #[test]
    fn staggered_pairs() {
        let mut r = rng::from_seed(1);
        let c = build_brickwork(6, 2, &mut r).unwrap();
        let pairs: Vec<Vec<(usize, usize)>> = c
            .layers()
            .iter()
            .map(|l| l.placements().iter().map(|p| p.qubits).collect())
            .collect();
        assert_eq!(pairs[0], vec![(0, 1), (2, 3), (4, 5)]);
        assert_eq!(pairs[1], vec![(1, 2), (3, 4)]);
        assert_eq!(c.declared_volume(), 6);
        assert_eq!(c.gate_count(), 5);
    }

    #[test]
    fn empty_circuit_is_identity() {
        let mut r = rng::from_seed(2);
        let c = build_brickwork(3, 0, &mut r).unwrap();
        let mut s = StateVector::zero(3).unwrap();
        c.apply(&mut s).unwrap();
        assert_eq!(s, StateVector::zero(3).unwrap());
    }

    #[test]
    fn rejects_single_qubit() {
        let mut r = rng::from_seed(2);
        assert!(build_brickwork(1, 3, &mut r).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = build_brickwork(5, 4, &mut rng::from_seed(7)).unwrap();
        let b = build_brickwork(5, 4, &mut rng::from_seed(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn transpose_matches_dense() {
        let c = build_brickwork(3, 3, &mut rng::from_seed(8)).unwrap();
        let u = c.unitary().unwrap();
        let ut = c.transpose().unitary().unwrap();
        assert!(linalg::max_abs(&(u.transpose() - ut)) < 1e-12);
    }

    #[test]
    fn record_round_trip() {
        let c = build_brickwork_with_parity(4, 3, 1, &mut rng::from_seed(9)).unwrap();
        let text = c.to_record();
        let back = BrickworkCircuit::from_record(&text).unwrap();
        assert_eq!(back.depth(), 3);
        assert_eq!(back.first_parity(), 1);
        assert!(linalg::max_abs(&(back.unitary().unwrap() - c.unitary().unwrap())) < 1e-15);
    }

    #[test]
    fn record_rejects_garbage() {
        assert!(BrickworkCircuit::from_record("brickwork 2 1 0\ngate 0 0 1 2\n").is_err());
        assert!(BrickworkCircuit::from_record("").is_err());
    }
}
