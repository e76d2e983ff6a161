use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cliffordsim::{random_clifford, stabilizer_states, MAX_ENUMERATED_QUBITS};
use crate::ensembles::{local_stab_state, sample_haar_state, EnsembleSpec};
use crate::error::{Error, Result};
use crate::rng;
use crate::statevector::{sample_index, DensityMatrix, StateVector};
use crate::teleport::{bell_measure, BellOutcome};

/// Enough information to rebuild the ancilla state `|φ⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum AncillaDescriptor {
    /// Index into the enumerated stabilizer-state table.
    Stabilizer(u32),
    /// Seed for a Clifford circuit or Haar state.
    Seed(u64),
    /// Per-qubit index into `|0⟩, |+⟩, |+i⟩` (and their Pauli images),
    /// two bits per qubit, qubit 0 most significant.
    Local(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShadowSample {
    pub ensemble: EnsembleSpec,
    pub descriptor: AncillaDescriptor,
    pub outcome: BellOutcome,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// Outcome probabilities from the closed-form POVM.
    #[default]
    Formula,
    /// Dense simulation of the Bell measurement on `|φ⟩ ⊗ purification(ρ)`.
    Simulated,
}

pub(crate) fn encode_local(indices: &[u8]) -> u64 {
    indices.iter().fold(0, |acc, &i| (acc << 2) | i as u64)
}

pub(crate) fn decode_local(n: usize, code: u64) -> Vec<u8> {
    (0..n).map(|q| ((code >> (2 * (n - 1 - q))) & 3) as u8).collect()
}

fn check_shadow_ensemble(ensemble: &EnsembleSpec) -> Result<usize> {
    ensemble.validate()?;
    match *ensemble {
        EnsembleSpec::CliffordStates { n } | EnsembleSpec::HaarStates { n } | EnsembleSpec::LocalStab { n } => Ok(n),
        other => Err(Error::WrongEnsemble(format!("{other:?} is not an ancilla ensemble"))),
    }
}

/// Rebuilds `|φ⟩` from a descriptor.
pub fn ancilla_state(ensemble: &EnsembleSpec, descriptor: AncillaDescriptor) -> Result<StateVector> {
    let n = check_shadow_ensemble(ensemble)?;
    match (*ensemble, descriptor) {
        (EnsembleSpec::CliffordStates { .. }, AncillaDescriptor::Stabilizer(i)) => stabilizer_states(n)?
            .get(i as usize)
            .cloned()
            .ok_or_else(|| Error::invalid(format!("stabilizer index {i} out of range"))),
        (EnsembleSpec::CliffordStates { .. }, AncillaDescriptor::Seed(s)) => {
            let circuit = random_clifford(n, &mut rng::from_seed(s));
            let mut state = StateVector::zero(n)?;
            circuit.apply_to_state(&mut state, 0)?;
            Ok(state)
        }
        (EnsembleSpec::HaarStates { .. }, AncillaDescriptor::Seed(s)) => sample_haar_state(n, &mut rng::from_seed(s)),
        (EnsembleSpec::LocalStab { .. }, AncillaDescriptor::Local(code)) => {
            if n < 32 && code >> (2 * n) != 0 {
                return Err(Error::invalid("local descriptor has bits beyond the register"));
            }
            let indices = decode_local(n, code);
            if indices.iter().any(|&i| i > 2) {
                return Err(Error::invalid("local stabilizer index must be 0, 1 or 2"));
            }
            local_stab_state(&indices)
        }
        (e, d) => Err(Error::WrongEnsemble(format!("descriptor {d:?} does not belong to {e:?}"))),
    }
}

fn draw_descriptor<R: Rng + ?Sized>(ensemble: &EnsembleSpec, rng: &mut R) -> Result<AncillaDescriptor> {
    let n = check_shadow_ensemble(ensemble)?;
    Ok(match ensemble {
        EnsembleSpec::CliffordStates { .. } if n <= MAX_ENUMERATED_QUBITS => {
            let count = stabilizer_states(n)?.len();
            AncillaDescriptor::Stabilizer(rng.random_range(0..count) as u32)
        }
        EnsembleSpec::LocalStab { .. } => {
            if n > 32 {
                return Err(Error::TooManyQubits { requested: n, limit: 32 });
            }
            let indices: Vec<u8> = (0..n).map(|_| rng.random_range(0..3u8)).collect();
            AncillaDescriptor::Local(encode_local(&indices))
        }
        _ => AncillaDescriptor::Seed(rng.random()),
    })
}

/// Probabilities `p_ab = 2^{-n} ⟨φ*| X^a Z^b ρ Z^b X^a |φ*⟩` indexed by
/// [`BellOutcome::index`].
pub fn outcome_probabilities(rho: &DensityMatrix, phi: &StateVector) -> Result<Vec<f64>> {
    let n = rho.num_qubits();
    if phi.num_qubits() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}-qubit ancilla against a {n}-qubit state",
            phi.num_qubits()
        )));
    }
    let d = 1usize << n;
    let r = rho.matrix();
    let conj: Vec<C64> = phi.amplitudes().iter().map(|z| z.conj()).collect();
    let mut out = vec![0.0; d * d];
    let mut m = vec![0.0f64; d];
    for a in 0..d {
        // With x = X^a φ*, p(b) = Σ_s (-1)^{b·s} Σ_j conj(x_j) ρ_{j,j^s} x_{j^s}.
        m.iter_mut().for_each(|v| *v = 0.0);
        for (s, ms) in m.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..d {
                let k = j ^ s;
                acc += conj[j ^ a].conj() * r[(j, k)] * conj[k ^ a];
            }
            *ms = acc.re;
        }
        walsh_hadamard(&mut m);
        for (b, v) in m.iter().enumerate() {
            out[(a << n) | b] = (v / d as f64).max(0.0);
        }
    }
    Ok(out)
}

fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (x, y) = (v[j], v[j + h]);
                v[j] = x + y;
                v[j + h] = x - y;
            }
        }
        h *= 2;
    }
}

/// Largest `descriptors · 4^n` table kept in memory by the sampler.
const TABLE_LIMIT: usize = 1 << 22;

pub struct ShadowSampler {
    rho: DensityMatrix,
    ensemble: EnsembleSpec,
    mode: SamplingMode,
    purified: Option<StateVector>,
    table: Option<Vec<Vec<f64>>>,
}

impl ShadowSampler {
    pub fn new(rho: DensityMatrix, ensemble: EnsembleSpec, mode: SamplingMode) -> Result<Self> {
        let n = check_shadow_ensemble(&ensemble)?;
        if rho.num_qubits() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n}-qubit ensemble for a {}-qubit state",
                rho.num_qubits()
            )));
        }
        let purified = match mode {
            SamplingMode::Simulated => Some(rho.purify()?),
            SamplingMode::Formula => None,
        };
        let finite = match ensemble {
            EnsembleSpec::CliffordStates { .. } if n <= MAX_ENUMERATED_QUBITS => Some(stabilizer_states(n)?.len()),
            EnsembleSpec::LocalStab { .. } if n <= 10 => Some(3usize.pow(n as u32)),
            _ => None,
        };
        let table = match (mode, finite) {
            (SamplingMode::Formula, Some(count)) if count << (2 * n) <= TABLE_LIMIT => Some(
                (0..count)
                    .into_par_iter()
                    .map(|i| {
                        let desc = table_descriptor(&ensemble, n, i);
                        outcome_probabilities(&rho, &ancilla_state(&ensemble, desc)?)
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => None,
        };
        Ok(Self { rho, ensemble, mode, purified, table })
    }

    pub fn ensemble(&self) -> &EnsembleSpec {
        &self.ensemble
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ShadowSample> {
        let n = self.rho.num_qubits();
        let descriptor = draw_descriptor(&self.ensemble, rng)?;
        let outcome = match self.mode {
            SamplingMode::Formula => {
                let probs = match &self.table {
                    Some(t) => std::borrow::Cow::Borrowed(&t[table_position(n, descriptor)]),
                    None => std::borrow::Cow::Owned(outcome_probabilities(
                        &self.rho,
                        &ancilla_state(&self.ensemble, descriptor)?,
                    )?),
                };
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-8 {
                    return Err(Error::CorruptedState(total));
                }
                BellOutcome::from_index(n, sample_index(&probs, total, rng) as u64)
            }
            SamplingMode::Simulated => {
                let phi = ancilla_state(&self.ensemble, descriptor)?;
                let joint = phi.tensor(self.purified.as_ref().expect("simulated mode keeps a purification"))?;
                let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, n + i)).collect();
                bell_measure(&joint, &pairs, rng)?.0
            }
        };
        Ok(ShadowSample { ensemble: self.ensemble, descriptor, outcome })
    }

    /// `count` samples, sample `i` drawn from its own stream of `master_seed`.
    pub fn sample_many(&self, count: usize, master_seed: u64) -> Result<Vec<ShadowSample>> {
        let key = rng::tag("shadow-sample");
        (0..count)
            .into_par_iter()
            .map(|i| self.sample(&mut rng::stream(master_seed, &[key, i as u64])))
            .collect()
    }
}

fn table_descriptor(ensemble: &EnsembleSpec, n: usize, i: usize) -> AncillaDescriptor {
    match ensemble {
        EnsembleSpec::LocalStab { .. } => {
            let mut rem = i;
            let mut indices = vec![0u8; n];
            for q in (0..n).rev() {
                indices[q] = (rem % 3) as u8;
                rem /= 3;
            }
            AncillaDescriptor::Local(encode_local(&indices))
        }
        _ => AncillaDescriptor::Stabilizer(i as u32),
    }
}

fn table_position(n: usize, descriptor: AncillaDescriptor) -> usize {
    match descriptor {
        AncillaDescriptor::Stabilizer(i) => i as usize,
        AncillaDescriptor::Local(code) => decode_local(n, code).iter().fold(0, |acc, &i| acc * 3 + i as usize),
        AncillaDescriptor::Seed(_) => unreachable!("seeded ensembles are never tabulated"),
    }
}

/// One shadow sample from the closed-form outcome distribution.
pub fn sample_shadow<R: Rng + ?Sized>(rho: &DensityMatrix, ensemble: &EnsembleSpec, rng: &mut R) -> Result<ShadowSample> {
    let n = check_shadow_ensemble(ensemble)?;
    if rho.num_qubits() != n {
        return Err(Error::DimensionMismatch("ensemble and state sizes differ".into()));
    }
    let descriptor = draw_descriptor(ensemble, rng)?;
    let probs = outcome_probabilities(rho, &ancilla_state(ensemble, descriptor)?)?;
    let total: f64 = probs.iter().sum();
    let outcome = BellOutcome::from_index(n, sample_index(&probs, total, rng) as u64);
    Ok(ShadowSample { ensemble: *ensemble, descriptor, outcome })
}

/// `|b⟩ = Z^b X^a |φ*⟩`.
pub fn measured_state(phi: &StateVector, outcome: &BellOutcome) -> Result<StateVector> {
    let n = phi.num_qubits();
    if outcome.num_pairs() != n {
        return Err(Error::DimensionMismatch("outcome and ancilla sizes differ".into()));
    }
    let a = outcome.a.value() as usize;
    let b = outcome.b.value() as usize;
    let amps = (0..phi.dim())
        .map(|j| {
            let v = phi.amplitude(j ^ a).conj();
            if (j & b).count_ones() % 2 == 1 { -v } else { v }
        })
        .collect();
    StateVector::from_amplitudes(amps)
}
