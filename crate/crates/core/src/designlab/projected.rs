use crate::error::{Error, Result};
use crate::statevector::StateVector;

const PROB_TOL: f64 = 1e-10;
/// Branches at or below this probability are dropped.
const ZERO_BRANCH: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedEntry {
    pub probability: f64,
    pub state: StateVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedEnsemble {
    num_qubits: usize,
    entries: Vec<ProjectedEntry>,
}

impl ProjectedEnsemble {
    pub fn new(entries: Vec<ProjectedEntry>) -> Result<Self> {
        let n = entries.first().ok_or_else(|| Error::invalid("empty ensemble"))?.state.num_qubits();
        let mut total = 0.0;
        for e in &entries {
            if e.state.num_qubits() != n {
                return Err(Error::DimensionMismatch("ensemble members differ in size".into()));
            }
            if !(e.probability >= 0.0) {
                return Err(Error::invalid(format!("negative probability {}", e.probability)));
            }
            if !e.state.is_normalized() {
                return Err(Error::invalid("ensemble member is not normalized"));
            }
            total += e.probability;
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::invalid(format!("probabilities sum to {total}")));
        }
        Ok(Self { num_qubits: n, entries })
    }

    /// Equal weights over `states`.
    pub fn uniform(states: Vec<StateVector>) -> Result<Self> {
        let w = 1.0 / states.len().max(1) as f64;
        Self::new(
            states
                .into_iter()
                .map(|s| Ok(ProjectedEntry { probability: w, state: s.normalized()? }))
                .collect::<Result<_>>()?,
        )
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn entries(&self) -> &[ProjectedEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Measures the first `m − n` qubits of `state` in the computational basis
/// and collects every nonzero branch of the remaining `n` qubits.
pub fn projected_ensemble(state: &StateVector, n: usize) -> Result<ProjectedEnsemble> {
    let m = state.num_qubits();
    if n == 0 || n >= m {
        return Err(Error::invalid(format!("need 1 <= n < m, got n={n}, m={m}")));
    }
    let state = state.clone().normalized()?;
    let block = 1usize << n;
    let entries = state
        .amplitudes()
        .chunks_exact(block)
        .filter_map(|chunk| {
            let p: f64 = chunk.iter().map(|z| z.norm_sqr()).sum();
            (p > ZERO_BRANCH).then(|| {
                let s = StateVector::from_amplitudes(chunk.to_vec()).and_then(StateVector::normalized);
                s.map(|state| ProjectedEntry { probability: p, state })
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = entries.iter().map(|e| e.probability).sum();
    ProjectedEnsemble::new(
        entries
            .into_iter()
            .map(|e| ProjectedEntry { probability: e.probability / total, state: e.state })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{choi_state, sample_haar_unitary};
    use crate::rng;
    use crate::statevector::fidelity;
    use num_complex::Complex64 as C64;

    #[test]
    fn choi_branches_are_columns() {
        let mut r = rng::from_seed(61);
        for n in 1..=2 {
            let u = sample_haar_unitary(1 << n, &mut r);
            let pe = projected_ensemble(&choi_state(n, &u).unwrap(), n).unwrap();
            assert_eq!(pe.len(), 1 << n);
            for (j, e) in pe.entries().iter().enumerate() {
                let col = StateVector::from_amplitudes(u.column(j).iter().copied().collect()).unwrap();
                assert!((fidelity(&e.state, &col).unwrap() - 1.0).abs() < 1e-10);
                assert!((e.probability - 1.0 / (1 << n) as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn trivial_cases() {
        let pe = projected_ensemble(&StateVector::zero(3).unwrap(), 2).unwrap();
        assert_eq!(pe.len(), 1);
        assert_eq!(pe.entries()[0].state, StateVector::zero(2).unwrap());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![C64::new(0.0, 0.0); 8];
        amps[0] = C64::new(h, 0.0);
        amps[7] = C64::new(h, 0.0);
        let ghz = StateVector::from_amplitudes(amps).unwrap();
        let pe = projected_ensemble(&ghz, 2).unwrap();
        assert_eq!(pe.len(), 2);
        assert_eq!(pe.entries()[0].state, StateVector::basis(2, 0).unwrap());
        assert_eq!(pe.entries()[1].state, StateVector::basis(2, 3).unwrap());
        assert!(projected_ensemble(&ghz, 3).is_err());
        assert!(projected_ensemble(&ghz, 0).is_err());
    }
}
