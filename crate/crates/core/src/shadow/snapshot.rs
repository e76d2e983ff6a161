use num_complex::Complex64 as C64;

use super::observable::{Observable, ObservableRepr};
use super::sample::{ancilla_state, decode_local, measured_state, AncillaDescriptor, ShadowSample};
use crate::ensembles::{local_stab_qubit, EnsembleSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::statevector::StateVector;

/// Largest register a snapshot is densified for.
const DENSE_LIMIT: usize = 12;

/// `(2^n + 1)|b⟩⟨b| − I`, kept as `|b⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalSnapshot {
    vector: StateVector,
}

/// `⊗_q (3|ψ_q⟩⟨ψ_q| − I)`, kept as the single-qubit factors `|ψ_q⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalSnapshot {
    factors: Vec<[C64; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Snapshot {
    Global(GlobalSnapshot),
    Local(LocalSnapshot),
}

pub fn snapshot_global(sample: &ShadowSample) -> Result<GlobalSnapshot> {
    match sample.ensemble {
        EnsembleSpec::CliffordStates { .. } | EnsembleSpec::HaarStates { .. } => {}
        other => return Err(Error::WrongEnsemble(format!("global snapshots need a 3-design ensemble, got {other:?}"))),
    }
    let phi = ancilla_state(&sample.ensemble, sample.descriptor)?;
    Ok(GlobalSnapshot { vector: measured_state(&phi, &sample.outcome)? })
}

pub fn snapshot_local(sample: &ShadowSample) -> Result<LocalSnapshot> {
    let (EnsembleSpec::LocalStab { n }, AncillaDescriptor::Local(code)) = (sample.ensemble, sample.descriptor) else {
        return Err(Error::WrongEnsemble(format!("local snapshots need the local stabilizer ensemble, got {:?}", sample.ensemble)));
    };
    if sample.outcome.num_pairs() != n {
        return Err(Error::DimensionMismatch("outcome and ancilla sizes differ".into()));
    }
    let factors = decode_local(n, code)
        .into_iter()
        .enumerate()
        .map(|(q, idx)| {
            if idx > 2 {
                return Err(Error::invalid("local stabilizer index must be 0, 1 or 2"));
            }
            let phi = local_stab_qubit(idx);
            let v = [phi[0].conj(), phi[1].conj()];
            let v = if sample.outcome.a.get(q) { [v[1], v[0]] } else { v };
            Ok(if sample.outcome.b.get(q) { [v[0], -v[1]] } else { v })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalSnapshot { factors })
}

/// Global or local snapshot according to the sample's ensemble.
pub fn snapshot(sample: &ShadowSample) -> Result<Snapshot> {
    match sample.ensemble {
        EnsembleSpec::LocalStab { .. } => snapshot_local(sample).map(Snapshot::Local),
        _ => snapshot_global(sample).map(Snapshot::Global),
    }
}

fn dense_guard(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        return Err(Error::TooManyQubits { requested: n, limit: DENSE_LIMIT });
    }
    Ok(())
}

impl GlobalSnapshot {
    pub fn vector(&self) -> &StateVector {
        &self.vector
    }

    pub fn num_qubits(&self) -> usize {
        self.vector.num_qubits()
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        dense_guard(self.num_qubits())?;
        let d = self.vector.dim();
        Ok(linalg::outer(self.vector.amplitudes()) * C64::new(d as f64 + 1.0, 0.0) - linalg::identity(d))
    }

    /// `tr(O σ̂) = (2^n + 1)⟨b|O|b⟩ − tr O`.
    pub fn expectation(&self, o: &Observable) -> Result<f64> {
        if o.num_qubits() != self.num_qubits() {
            return Err(Error::DimensionMismatch("observable and snapshot sizes differ".into()));
        }
        let b = self.vector.amplitudes();
        let inner = match o.repr() {
            ObservableRepr::Dense(m) => {
                let mut acc = C64::new(0.0, 0.0);
                for (i, bi) in b.iter().enumerate() {
                    for (j, bj) in b.iter().enumerate() {
                        acc += bi.conj() * m[(i, j)] * bj;
                    }
                }
                acc.re
            }
            ObservableRepr::PauliSum(terms) => {
                let qubits: Vec<usize> = (0..self.num_qubits()).collect();
                let mut total = 0.0;
                for t in terms {
                    let mut pb = self.vector.clone();
                    t.pauli.apply_to_state(&mut pb, &qubits)?;
                    total += t.coeff * self.vector.inner(&pb)?.re;
                }
                total
            }
        };
        Ok((self.vector.dim() as f64 + 1.0) * inner - o.trace())
    }

    /// `tr(σ̂ σ̂')`.
    pub fn overlap(&self, other: &GlobalSnapshot) -> Result<f64> {
        let d1 = self.vector.dim() as f64 + 1.0;
        let ov = self.vector.inner(&other.vector)?.norm_sqr();
        Ok(d1 * d1 * ov - 2.0 * d1 + self.vector.dim() as f64)
    }
}

fn qubit_inner(a: &[C64; 2], b: &[C64; 2]) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

impl LocalSnapshot {
    pub fn factors(&self) -> &[[C64; 2]] {
        &self.factors
    }

    pub fn num_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        dense_guard(self.num_qubits())?;
        Ok(self
            .factors
            .iter()
            .map(|f| linalg::outer(f) * C64::new(3.0, 0.0) - linalg::identity(2))
            .fold(CMatrix::identity(1, 1), |acc, m| linalg::kron(&acc, &m)))
    }

    /// Pauli terms are evaluated factor by factor, touching only their support.
    pub fn expectation(&self, o: &Observable) -> Result<f64> {
        if o.num_qubits() != self.num_qubits() {
            return Err(Error::DimensionMismatch("observable and snapshot sizes differ".into()));
        }
        match o.repr() {
            ObservableRepr::Dense(m) => Ok(linalg::trace(&(m * self.to_matrix()?)).re),
            ObservableRepr::PauliSum(terms) => Ok(terms
                .iter()
                .map(|t| {
                    let value: f64 = t
                        .pauli
                        .support()
                        .into_iter()
                        .map(|q| {
                            let [u, v] = self.factors[q];
                            // 3⟨ψ|σ|ψ⟩ for σ ∈ {X, Y, Z}
                            3.0 * match t.pauli.factor(q) {
                                (true, false) => 2.0 * (u.conj() * v).re,
                                (true, true) => 2.0 * (u.conj() * v).im,
                                _ => u.norm_sqr() - v.norm_sqr(),
                            }
                        })
                        .product();
                    t.coeff * value
                })
                .sum()),
        }
    }

    /// `tr(σ̂ σ̂') = ∏_q (9|⟨ψ_q|ψ'_q⟩|² − 4)`.
    pub fn overlap(&self, other: &LocalSnapshot) -> Result<f64> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::DimensionMismatch("snapshot sizes differ".into()));
        }
        Ok(self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| 9.0 * qubit_inner(a, b).norm_sqr() - 4.0)
            .product())
    }
}

impl Snapshot {
    pub fn num_qubits(&self) -> usize {
        match self {
            Snapshot::Global(s) => s.num_qubits(),
            Snapshot::Local(s) => s.num_qubits(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        match self {
            Snapshot::Global(s) => s.to_matrix(),
            Snapshot::Local(s) => s.to_matrix(),
        }
    }

    pub fn expectation(&self, o: &Observable) -> Result<f64> {
        match self {
            Snapshot::Global(s) => s.expectation(o),
            Snapshot::Local(s) => s.expectation(o),
        }
    }

    pub fn overlap(&self, other: &Snapshot) -> Result<f64> {
        match (self, other) {
            (Snapshot::Global(a), Snapshot::Global(b)) => a.overlap(b),
            (Snapshot::Local(a), Snapshot::Local(b)) => a.overlap(b),
            _ => Err(Error::WrongEnsemble("cannot mix global and local snapshots".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use crate::cliffordsim::PauliString;
    use crate::ensembles::sample_density_matrix;
    use crate::rng;
    use crate::shadow::{sample_shadow, PauliTerm};
    use crate::teleport::BellOutcome;

    fn outcome(a: &str, b: &str) -> BellOutcome {
        BellOutcome::new(Bits::parse(a).unwrap(), Bits::parse(b).unwrap()).unwrap()
    }

    #[test]
    fn hand_examples() {
        let g = ShadowSample {
            ensemble: EnsembleSpec::CliffordStates { n: 1 },
            descriptor: AncillaDescriptor::Stabilizer(0),
            outcome: outcome("0", "0"),
        };
        let m = snapshot_global(&g).unwrap().to_matrix().unwrap();
        let phi = ancilla_state(&g.ensemble, g.descriptor).unwrap();
        let expected = linalg::outer(phi.conjugate().amplitudes()) * C64::new(3.0, 0.0) - linalg::identity(2);
        assert!(linalg::max_abs(&(m.clone() - expected)) < 1e-14);
        assert!((linalg::trace(&m).re - 1.0).abs() < 1e-14);

        let l = ShadowSample {
            ensemble: EnsembleSpec::LocalStab { n: 1 },
            descriptor: AncillaDescriptor::Local(0),
            outcome: outcome("0", "0"),
        };
        let m = snapshot_local(&l).unwrap().to_matrix().unwrap();
        let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(2.0, 0.0), C64::new(-1.0, 0.0)]));
        assert!(linalg::max_abs(&(m - diag)) < 1e-15);
        assert!(snapshot_global(&l).is_err());
        assert!(snapshot_local(&g).is_err());
    }

    #[test]
    fn factored_evaluation_matches_dense() {
        let mut r = rng::from_seed(11);
        let rho = sample_density_matrix(3, &mut r).unwrap();
        let o = Observable::weighted(&[(0.7, "XYZ"), (-0.2, "IZI"), (1.1, "YIX"), (0.3, "III")]).unwrap();
        let dense = o.to_matrix().unwrap();
        for spec in [EnsembleSpec::LocalStab { n: 3 }, EnsembleSpec::CliffordStates { n: 3 }, EnsembleSpec::HaarStates { n: 3 }] {
            for _ in 0..20 {
                let s = snapshot(&sample_shadow(&rho, &spec, &mut r).unwrap()).unwrap();
                let m = s.to_matrix().unwrap();
                let want = linalg::trace(&(&dense * &m)).re;
                assert!((s.expectation(&o).unwrap() - want).abs() < 1e-10);
                let od = Observable::dense(dense.clone()).unwrap();
                assert!((s.expectation(&od).unwrap() - want).abs() < 1e-10);
                assert!((linalg::trace(&m).re - 1.0).abs() < 1e-10);
                let s2 = snapshot(&sample_shadow(&rho, &spec, &mut r).unwrap()).unwrap();
                let want = linalg::trace(&(&m * s2.to_matrix().unwrap())).re;
                assert!((s.overlap(&s2).unwrap() - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn identity_observable_reads_one() {
        let o = Observable::pauli_sum(2, vec![PauliTerm { coeff: 1.0, pauli: PauliString::identity(2) }]).unwrap();
        let mut r = rng::from_seed(12);
        let rho = sample_density_matrix(2, &mut r).unwrap();
        for spec in [EnsembleSpec::LocalStab { n: 2 }, EnsembleSpec::CliffordStates { n: 2 }] {
            let s = snapshot(&sample_shadow(&rho, &spec, &mut r).unwrap()).unwrap();
            assert!((s.expectation(&o).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
