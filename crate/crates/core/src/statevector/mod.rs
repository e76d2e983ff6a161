//! Dense state-vector simulation.
//!
//! Qubit 0 is the most significant bit of the basis index, so the bitstring
//! `b_0 b_1 … b_{m-1}` labels index `Σ b_i 2^(m-1-i)`.

mod density;
mod gate;
mod kernel;

use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64 as C64;
use rand::Rng;

pub use density::{density_from_state, reduced_density, DensityMatrix};
pub use gate::GateMatrix;
pub(crate) use kernel::{insert_zero_bits, shift_of};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
pub use crate::linalg::trace_norm;

pub const DEFAULT_MAX_QUBITS: usize = 24;
const NORM_TOL: f64 = 1e-12;
const MEASURE_TOL: f64 = 1e-8;

static MAX_QUBITS: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_QUBITS);

pub fn max_qubits() -> usize {
    MAX_QUBITS.load(Ordering::Relaxed)
}

pub fn set_max_qubits(limit: usize) {
    MAX_QUBITS.store(limit, Ordering::Relaxed);
}

fn check_size(m: usize) -> Result<()> {
    let limit = max_qubits();
    if m > limit {
        return Err(Error::TooManyQubits { requested: m, limit });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
    normalized: bool,
}

impl StateVector {
    /// `|0…0⟩` on `m` qubits.
    pub fn zero(m: usize) -> Result<Self> {
        Self::basis(m, 0)
    }

    pub fn basis(m: usize, index: usize) -> Result<Self> {
        check_size(m)?;
        if index >= 1 << m {
            return Err(Error::invalid(format!("basis index {index} out of range for {m} qubits")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << m];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self {
            num_qubits: m,
            amps,
            normalized: true,
        })
    }

    pub fn from_bits(bits: &Bits) -> Result<Self> {
        Self::basis(bits.len(), bits.value() as usize)
    }

    /// Wraps raw amplitudes; the normalized flag is set if the norm is 1.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        let m = len.trailing_zeros() as usize;
        check_size(m)?;
        let mut s = Self {
            num_qubits: m,
            amps,
            normalized: false,
        };
        s.normalized = (s.norm() - 1.0).abs() < NORM_TOL;
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / norm;
        self.amps.iter_mut().for_each(|a| *a *= inv);
        self.normalized = true;
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn scale(&mut self, factor: C64) {
        self.amps.iter_mut().for_each(|a| *a *= factor);
        self.normalized = self.normalized && (factor.norm() - 1.0).abs() < NORM_TOL;
    }

    /// `self ⊗ other`; the qubits of `self` come first.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let m = self.num_qubits + other.num_qubits;
        check_size(m)?;
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(Self {
            num_qubits: m,
            amps,
            normalized: self.normalized && other.normalized,
        })
    }

    pub(crate) fn validate_targets(&self, targets: &[usize]) -> Result<()> {
        for (i, &q) in targets.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits: self.num_qubits,
                });
            }
            if targets[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &GateMatrix, targets: &[usize]) -> Result<()> {
        if gate.arity() != targets.len() {
            return Err(Error::ArityMismatch {
                arity: gate.arity(),
                targets: targets.len(),
            });
        }
        self.validate_targets(targets)?;
        kernel::apply_matrix(&mut self.amps, self.num_qubits, gate.matrix(), targets);
        Ok(())
    }

    /// Applies an arbitrary (not necessarily unitary) matrix on `targets`.
    /// Clears the normalized flag.
    pub fn apply_matrix(&mut self, matrix: &CMatrix, targets: &[usize]) -> Result<()> {
        self.validate_targets(targets)?;
        let dim = 1usize << targets.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on {} qubits",
                matrix.nrows(),
                matrix.ncols(),
                targets.len()
            )));
        }
        kernel::apply_matrix(&mut self.amps, self.num_qubits, matrix, targets);
        self.normalized = false;
        Ok(())
    }

    /// Applies a full-register matrix.
    pub fn apply_full(&mut self, matrix: &CMatrix) -> Result<()> {
        let targets: Vec<usize> = (0..self.num_qubits).collect();
        let was = self.normalized;
        self.apply_matrix(matrix, &targets)?;
        self.normalized = was && (self.norm() - 1.0).abs() < NORM_TOL;
        Ok(())
    }

    /// `(⟨bits| ⊗ I)|self⟩` on the remaining qubits (kept in their original
    /// order), unnormalized, together with its squared norm.
    pub fn project_computational(&self, qubits: &[usize], bits: &Bits) -> Result<(StateVector, f64)> {
        self.validate_targets(qubits)?;
        if bits.len() != qubits.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} outcome bits for {} qubits",
                bits.len(),
                qubits.len()
            )));
        }
        let m = self.num_qubits;
        let fixed: usize = qubits
            .iter()
            .enumerate()
            .filter(|&(i, _)| bits.get(i))
            .map(|(_, &q)| 1usize << shift_of(m, q))
            .sum();
        let mut sorted: Vec<usize> = qubits.iter().map(|&q| shift_of(m, q)).collect();
        sorted.sort_unstable();
        let rest = m - qubits.len();
        let amps: Vec<C64> = (0..1usize << rest)
            .map(|r| self.amps[insert_zero_bits(r, &sorted) | fixed])
            .collect();
        let sub = StateVector {
            num_qubits: rest,
            amps,
            normalized: false,
        };
        let prob = sub.norm_sqr();
        Ok((sub, prob))
    }

    /// Outcome distribution of the listed qubits, indexed by outcome value.
    pub fn probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        self.validate_targets(qubits)?;
        let m = self.num_qubits;
        let k = qubits.len();
        let shifts: Vec<usize> = qubits.iter().map(|&q| shift_of(m, q)).collect();
        let mut probs = vec![0.0; 1 << k];
        for (idx, a) in self.amps.iter().enumerate() {
            let mut out = 0usize;
            for (j, &s) in shifts.iter().enumerate() {
                out |= ((idx >> s) & 1) << (k - 1 - j);
            }
            probs[out] += a.norm_sqr();
        }
        Ok(probs)
    }

    pub fn measure_computational<R: Rng + ?Sized>(
        &self,
        qubits: &[usize],
        rng: &mut R,
    ) -> Result<(Bits, StateVector, f64)> {
        let probs = self.probabilities(qubits)?;
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MEASURE_TOL {
            return Err(Error::CorruptedState(total));
        }
        let outcome = sample_index(&probs, total, rng);
        let bits = Bits::from_value(qubits.len(), outcome as u64);
        let (post, prob) = self.project_computational(qubits, &bits)?;
        Ok((bits, post.normalized()?, prob))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "inner product of {}- and {}-qubit states",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Entrywise complex conjugate in the computational basis.
    pub fn conjugate(&self) -> StateVector {
        StateVector {
            num_qubits: self.num_qubits,
            amps: self.amps.iter().map(|a| a.conj()).collect(),
            normalized: self.normalized,
        }
    }

    /// Reorders qubits so that new qubit `i` is old qubit `order[i]`.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<StateVector> {
        if order.len() != self.num_qubits {
            return Err(Error::DimensionMismatch("permutation length".into()));
        }
        self.validate_targets(order)?;
        let m = self.num_qubits;
        let mut amps = vec![C64::new(0.0, 0.0); self.dim()];
        for (idx, a) in self.amps.iter().enumerate() {
            let mut new_idx = 0usize;
            for (i, &q) in order.iter().enumerate() {
                new_idx |= ((idx >> shift_of(m, q)) & 1) << shift_of(m, i);
            }
            amps[new_idx] = *a;
        }
        Ok(StateVector {
            num_qubits: m,
            amps,
            normalized: self.normalized,
        })
    }
}

pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], total: f64, rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// `|⟨a|b⟩|²` after normalizing both states.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let ov = a.inner(b)?.norm_sqr() / (na * nb);
    Ok(ov.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell() -> StateVector {
        StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]).unwrap()
    }

    fn ghz3() -> StateVector {
        let mut amps = vec![c(0.0); 8];
        amps[0] = c(FRAC_1_SQRT_2);
        amps[7] = c(FRAC_1_SQRT_2);
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn cnot_on_10() {
        let mut s = StateVector::from_bits(&Bits::parse("10").unwrap()).unwrap();
        s.apply_gate(&GateMatrix::cnot(), &[0, 1]).unwrap();
        assert_eq!(s.amplitude(3), c(1.0));
    }

    #[test]
    fn reversed_cnot_targets() {
        let mut s = StateVector::from_bits(&Bits::parse("01").unwrap()).unwrap();
        s.apply_gate(&GateMatrix::cnot(), &[1, 0]).unwrap();
        assert_eq!(s.amplitude(3), c(1.0));
    }

    #[test]
    fn identity_gate_is_noop() {
        let mut rng = rng::from_seed(3);
        let s = crate::ensembles::sample_haar_state(3, &mut rng).unwrap();
        let mut t = s.clone();
        t.apply_gate(&GateMatrix::identity(2), &[2, 0]).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn hadamard_tensor_identity() {
        let g = GateMatrix::hadamard().tensor(&GateMatrix::identity(1)).unwrap();
        let mut s = StateVector::zero(2).unwrap();
        s.apply_gate(&g, &[0, 1]).unwrap();
        assert!((s.amplitude(0) - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((s.amplitude(2) - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert_eq!(s.amplitude(1), c(0.0));
    }

    #[test]
    fn gate_errors() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(
            s.apply_gate(&GateMatrix::cnot(), &[0]),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            s.apply_gate(&GateMatrix::hadamard(), &[2]),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(matches!(
            s.apply_gate(&GateMatrix::cnot(), &[1, 1]),
            Err(Error::DuplicateQubit(1))
        ));
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert!(matches!(GateMatrix::new(bad), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn bell_marginal_projection() {
        let (sub, p) = bell().project_computational(&[0], &Bits::parse("0").unwrap()).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!((sub.amplitude(0) - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert_eq!(sub.amplitude(1), c(0.0));
    }

    #[test]
    fn orthogonal_projection_is_zero() {
        let (sub, p) = StateVector::zero(2)
            .unwrap()
            .project_computational(&[0], &Bits::parse("1").unwrap())
            .unwrap();
        assert_eq!(p, 0.0);
        assert_eq!(sub.norm(), 0.0);
    }

    #[test]
    fn ghz_projection() {
        let (sub, p) = ghz3().project_computational(&[0], &Bits::parse("0").unwrap()).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert_eq!(sub.num_qubits(), 2);
        assert!((sub.amplitude(0) - c(FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn project_middle_qubit_keeps_order() {
        let s = StateVector::from_bits(&Bits::parse("101").unwrap()).unwrap();
        let (sub, p) = s.project_computational(&[1], &Bits::parse("0").unwrap()).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(sub.amplitude(0b11), c(1.0));
    }

    #[test]
    fn measure_zero_state() {
        let mut rng = rng::from_seed(1);
        let (b, post, p) = StateVector::zero(1).unwrap().measure_computational(&[0], &mut rng).unwrap();
        assert_eq!(b.value(), 0);
        assert_eq!(p, 1.0);
        assert!(post.is_normalized());
    }

    #[test]
    fn measure_plus_frequencies() {
        let mut rng = rng::from_seed(2);
        let mut plus = StateVector::zero(1).unwrap();
        plus.apply_gate(&GateMatrix::hadamard(), &[0]).unwrap();
        let shots = 10_000;
        let ones = (0..shots)
            .filter(|_| plus.measure_computational(&[0], &mut rng).unwrap().0.value() == 1)
            .count() as f64;
        let sigma = (shots as f64 * 0.25).sqrt();
        assert!((ones - 5000.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn measure_bell_pair_correlated() {
        let mut rng = rng::from_seed(4);
        for _ in 0..200 {
            let (b, post, _) = bell().measure_computational(&[0, 1], &mut rng).unwrap();
            assert!(b.value() == 0 || b.value() == 3);
            assert_eq!(post.num_qubits(), 0);
        }
    }

    #[test]
    fn measure_rejects_corrupted_state() {
        let mut rng = rng::from_seed(5);
        let s = StateVector::from_amplitudes(vec![c(1.0), c(1.0)]).unwrap();
        assert!(matches!(
            s.measure_computational(&[0], &mut rng),
            Err(Error::CorruptedState(_))
        ));
    }

    #[test]
    fn fidelity_examples() {
        let zero = StateVector::zero(1).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        let mut plus = zero.clone();
        plus.apply_gate(&GateMatrix::hadamard(), &[0]).unwrap();
        let mut phased = plus.clone();
        phased.scale(C64::from_polar(1.0, 0.7));
        assert!((fidelity(&plus, &phased).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-15);
        let empty = StateVector::from_amplitudes(vec![c(0.0), c(0.0)]).unwrap();
        assert!(matches!(fidelity(&zero, &empty), Err(Error::ZeroNorm)));
    }

    #[test]
    fn permute_round_trip() {
        let s = StateVector::from_bits(&Bits::parse("110").unwrap()).unwrap();
        let p = s.permute_qubits(&[2, 0, 1]).unwrap();
        assert_eq!(p.amplitude(0b011), c(1.0));
    }

    #[test]
    fn size_limit() {
        assert!(matches!(
            StateVector::zero(DEFAULT_MAX_QUBITS + 1),
            Err(Error::TooManyQubits { .. })
        ));
    }

    #[test]
    fn parallel_kernel_matches_serial() {
        let mut rng = rng::from_seed(9);
        let s = crate::ensembles::sample_haar_state(15, &mut rng).unwrap();
        let g = crate::ensembles::sample_haar_su4(&mut rng);
        let mut par = s.clone();
        par.apply_gate(&g, &[3, 11]).unwrap();
        let mut amps = s.amplitudes().to_vec();
        let mut sorted = vec![shift_of(15, 3), shift_of(15, 11)];
        sorted.sort_unstable();
        let o = [0, 1 << shift_of(15, 11), 1 << shift_of(15, 3)];
        let offs = [o[0], o[1], o[2], o[1] + o[2]];
        for r in 0..(1 << 13) {
            let base = insert_zero_bits(r, &sorted);
            let buf: Vec<C64> = offs.iter().map(|&x| amps[base + x]).collect();
            for row in 0..4 {
                let mut acc = C64::new(0.0, 0.0);
                for col in 0..4 {
                    acc += g.matrix()[(row, col)] * buf[col];
                }
                amps[base + offs[row]] = acc;
            }
        }
        assert_eq!(par.amplitudes(), &amps[..]);
    }
}
