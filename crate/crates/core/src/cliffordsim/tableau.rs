use super::{CliffordCircuit, CliffordGate, PauliString};
use crate::error::{Error, Result};

/// Images of the Pauli generators under a Clifford map `U`: row `q` is
/// `U X_q U†` and row `n+q` is `U Z_q U†`, each with its exact phase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordTableau {
    n: usize,
    rows: Vec<PauliString>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|q| PauliString::single(n, q, 'X').unwrap())
            .chain((0..n).map(|q| PauliString::single(n, q, 'Z').unwrap()))
            .collect();
        Self { n, rows }
    }

    /// Builds a tableau from a `2n × 2n` binary matrix (rows `[x | z]`) and
    /// sign bits; each row becomes the Hermitian Pauli `(-1)^sign X^x Z^z`
    /// with `Y` factors accounted for.
    pub fn from_symplectic(matrix: &[Vec<bool>], signs: &[bool]) -> Result<Self> {
        let two_n = matrix.len();
        if two_n % 2 != 0 || signs.len() != two_n || matrix.iter().any(|r| r.len() != two_n) {
            return Err(Error::DimensionMismatch("tableau must be 2n x 2n with 2n signs".into()));
        }
        let n = two_n / 2;
        let rows = matrix
            .iter()
            .zip(signs)
            .map(|(row, &sign)| {
                let x = row[..n].to_vec();
                let z = row[n..].to_vec();
                let ny = x.iter().zip(&z).filter(|(a, b)| **a && **b).count() as u8;
                PauliString::new(x, z, (ny + if sign { 2 } else { 0 }) % 4)
            })
            .collect::<Result<Vec<_>>>()?;
        let t = Self { n, rows };
        if !t.is_symplectic() {
            return Err(Error::invalid("matrix is not symplectic"));
        }
        Ok(t)
    }

    pub fn from_circuit(circuit: &CliffordCircuit) -> Result<Self> {
        let mut t = Self::identity(circuit.num_qubits());
        t.apply_circuit(circuit)?;
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[PauliString] {
        &self.rows
    }

    pub fn x_image(&self, q: usize) -> &PauliString {
        &self.rows[q]
    }

    pub fn z_image(&self, q: usize) -> &PauliString {
        &self.rows[self.n + q]
    }

    /// Composes the gate after the current map.
    pub fn apply_gate(&mut self, gate: &CliffordGate) -> Result<()> {
        for row in &mut self.rows {
            row.conjugate_gate(gate)?;
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &CliffordCircuit) -> Result<()> {
        if circuit.num_qubits() != self.n {
            return Err(Error::DimensionMismatch("circuit and tableau sizes differ".into()));
        }
        for g in circuit.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// `U P U†` assembled from the generator images.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        if p.num_qubits() != self.n {
            return Err(Error::DimensionMismatch("Pauli and tableau sizes differ".into()));
        }
        let mut out = PauliString::identity(self.n).with_phase(p.phase());
        for q in 0..self.n {
            if p.x_bits()[q] {
                out = out.mul(&self.rows[q])?;
            }
        }
        for q in 0..self.n {
            if p.z_bits()[q] {
                out = out.mul(&self.rows[self.n + q])?;
            }
        }
        Ok(out)
    }

    /// Rows are Hermitian and obey the canonical commutation pattern.
    pub fn is_symplectic(&self) -> bool {
        let n = self.n;
        if !self.rows.iter().all(PauliString::is_hermitian) {
            return false;
        }
        for i in 0..2 * n {
            for j in 0..2 * n {
                let anticommute = !self.rows[i].commutes_with(&self.rows[j]);
                let expected = i != j && i % n == j % n;
                if anticommute != expected {
                    return false;
                }
            }
        }
        true
    }

    pub fn symplectic_matrix(&self) -> Vec<Vec<bool>> {
        self.rows
            .iter()
            .map(|r| r.x_bits().iter().chain(r.z_bits()).copied().collect())
            .collect()
    }

    /// A circuit over `{H, S, CX}` whose tableau equals `self`, phases
    /// included.
    pub fn to_circuit(&self) -> Result<CliffordCircuit> {
        if !self.is_symplectic() {
            return Err(Error::invalid("tableau is not symplectic"));
        }
        let n = self.n;
        let mut work = self.clone();
        let mut gates: Vec<CliffordGate> = Vec::new();
        let mut push = |w: &mut CliffordTableau, g: CliffordGate| -> Result<()> {
            w.apply_gate(&g)?;
            gates.push(g);
            Ok(())
        };
        for q in 0..n {
            // Row X_q → X_q.
            if !work.rows[q].x_bits()[q] {
                let row = work.rows[q].clone();
                if let Some(j) = (q + 1..n).find(|&j| row.x_bits()[j]) {
                    push(&mut work, CliffordGate::CX(j, q))?;
                } else if row.z_bits()[q] {
                    push(&mut work, CliffordGate::H(q))?;
                } else {
                    let j = (q + 1..n).find(|&j| row.z_bits()[j]).expect("row is not identity");
                    push(&mut work, CliffordGate::H(j))?;
                    push(&mut work, CliffordGate::CX(j, q))?;
                }
            }
            clear_row(&mut work, q, q, &mut push)?;

            // Row Z_q → Z_q, with gates that fix X_q after conjugating by H_q.
            push(&mut work, CliffordGate::H(q))?;
            debug_assert!(work.rows[n + q].x_bits()[q]);
            clear_row(&mut work, n + q, q, &mut push)?;
            push(&mut work, CliffordGate::H(q))?;
        }
        let mut prefix: Vec<CliffordGate> = Vec::new();
        for q in 0..n {
            if work.rows[q].phase() == 2 {
                prefix.extend([CliffordGate::S(q), CliffordGate::S(q)]);
            }
            if work.rows[n + q].phase() == 2 {
                prefix.extend([CliffordGate::H(q), CliffordGate::S(q), CliffordGate::S(q), CliffordGate::H(q)]);
            }
        }
        prefix.extend(gates.iter().rev().flat_map(CliffordGate::inverse));
        CliffordCircuit::from_gates(n, &prefix)
    }
}

/// Reduces `row` (which has `x_q = 1`) to `±X_q` using `CX(q, j)`, `H_j` and
/// `S_q` for `j > q`.
fn clear_row<F>(work: &mut CliffordTableau, row: usize, q: usize, push: &mut F) -> Result<()>
where
    F: FnMut(&mut CliffordTableau, CliffordGate) -> Result<()>,
{
    let n = work.n;
    for j in q + 1..n {
        if work.rows[row].x_bits()[j] {
            push(work, CliffordGate::CX(q, j))?;
        }
    }
    for j in q + 1..n {
        if work.rows[row].z_bits()[j] {
            push(work, CliffordGate::H(j))?;
            push(work, CliffordGate::CX(q, j))?;
        }
    }
    if work.rows[row].z_bits()[q] {
        push(work, CliffordGate::S(q))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cliffordsim::random_layered_clifford;
    use crate::linalg;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn tableau_conjugation_matches_dense() {
        let mut r = rng::from_seed(31);
        for n in 1..=4 {
            for _ in 0..25 {
                let c = random_layered_clifford(n, 6, &mut r);
                let t = CliffordTableau::from_circuit(&c).unwrap();
                assert!(t.is_symplectic());
                let x: Vec<bool> = (0..n).map(|_| r.random()).collect();
                let z: Vec<bool> = (0..n).map(|_| r.random()).collect();
                let p = PauliString::new(x, z, r.random_range(0..4)).unwrap();
                assert_eq!(t.conjugate(&p).unwrap(), c.conjugate_pauli(&p).unwrap());
                let u = c.unitary().unwrap();
                let dense = &u * p.to_matrix().unwrap() * u.adjoint();
                assert!(linalg::max_abs(&(dense - t.conjugate(&p).unwrap().to_matrix().unwrap())) < 1e-10);
            }
        }
    }

    #[test]
    fn synthesis_reproduces_tableau() {
        let mut r = rng::from_seed(32);
        for n in 1..=5 {
            for _ in 0..20 {
                let c = random_layered_clifford(n, 8, &mut r);
                let t = CliffordTableau::from_circuit(&c).unwrap();
                let back = CliffordTableau::from_circuit(&t.to_circuit().unwrap()).unwrap();
                assert_eq!(back, t);
            }
        }
    }

    #[test]
    fn circuit_then_inverse_is_identity() {
        let mut r = rng::from_seed(33);
        let c = random_layered_clifford(4, 10, &mut r);
        let mut t = CliffordTableau::from_circuit(&c).unwrap();
        t.apply_circuit(&c.inverse()).unwrap();
        assert_eq!(t, CliffordTableau::identity(4));
    }

    #[test]
    fn rejects_non_symplectic() {
        let m = vec![vec![true, false], vec![true, false]];
        assert!(CliffordTableau::from_symplectic(&m, &[false, false]).is_err());
    }
}
