use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::observable::Observable;
use super::sample::{AncillaDescriptor, ShadowSample};
use super::snapshot::{snapshot, Snapshot};
use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::teleport::BellOutcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanMode {
    Global,
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationPlan {
    pub epsilon: f64,
    pub delta: f64,
    /// Number of median groups.
    pub groups: usize,
    /// Samples per group.
    pub batch_size: usize,
}

impl EstimationPlan {
    pub fn num_samples(&self) -> usize {
        self.groups * self.batch_size
    }
}

/// `K = ⌈2 ln(2M/δ)⌉` groups of `B = ⌈30 · max tr(O²) / ε²⌉` samples
/// (global), with `4^k` in place of `tr(O²)` for `k`-local observables.
pub fn plan_estimation(observables: &[Observable], epsilon: f64, delta: f64, mode: PlanMode) -> Result<EstimationPlan> {
    if observables.is_empty() {
        return Err(Error::invalid("no observables to plan for"));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    let scale = match mode {
        PlanMode::Global => observables.iter().map(Observable::trace_sq).fold(0.0, f64::max),
        PlanMode::Local => {
            if let Some(o) = observables.iter().find(|o| o.infinity_norm_bound() > 1.0 + 1e-9) {
                return Err(Error::invalid(format!(
                    "local plans need operator norm at most 1, got {}",
                    o.infinity_norm_bound()
                )));
            }
            observables.iter().map(|o| 4f64.powi(o.locality() as i32)).fold(0.0, f64::max)
        }
    };
    let m = observables.len() as f64;
    let batch_size = ((30.0 * scale / (epsilon * epsilon)).ceil() as usize).max(1);
    let groups = ((2.0 * (2.0 * m / delta).ln()).ceil() as usize).max(1);
    Ok(EstimationPlan { epsilon, delta, groups, batch_size })
}

/// Means of `groups` consecutive blocks of `⌊N/groups⌋` values, then their
/// median (midpoint of the two central means when `groups` is even).
pub fn median_of_means(values: &[f64], groups: usize) -> Result<f64> {
    if groups == 0 {
        return Err(Error::invalid("need at least one group"));
    }
    if values.len() < groups {
        return Err(Error::InsufficientSamples { needed: groups, got: values.len() });
    }
    let size = values.len() / groups;
    let mut means: Vec<f64> = values
        .chunks_exact(size)
        .take(groups)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let mid = groups / 2;
    Ok(if groups % 2 == 1 { means[mid] } else { 0.5 * (means[mid - 1] + means[mid]) })
}

fn common_ensemble(samples: &[ShadowSample]) -> Result<EnsembleSpec> {
    let first = samples.first().ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?.ensemble;
    if samples.iter().any(|s| s.ensemble != first) {
        return Err(Error::WrongEnsemble("samples come from different ensembles".into()));
    }
    Ok(first)
}

/// `tr(O σ̂_i)` for every sample; repeated (ancilla, outcome) pairs are
/// evaluated once.
pub fn snapshot_values(samples: &[ShadowSample], observable: &Observable) -> Result<Vec<f64>> {
    let ensemble = common_ensemble(samples)?;
    if ensemble.num_qubits() != observable.num_qubits() {
        return Err(Error::DimensionMismatch("observable and samples act on different registers".into()));
    }
    let mut keys: Vec<(AncillaDescriptor, BellOutcome)> = samples.iter().map(|s| (s.descriptor, s.outcome)).collect();
    keys.sort_by_key(|(d, o)| (*d, o.index()));
    keys.dedup();
    let values = keys
        .par_iter()
        .map(|&(descriptor, outcome)| snapshot(&ShadowSample { ensemble, descriptor, outcome })?.expectation(observable))
        .collect::<Result<Vec<f64>>>()?;
    let lookup: HashMap<_, _> = keys.into_iter().zip(values).collect();
    Ok(samples.iter().map(|s| lookup[&(s.descriptor, s.outcome)]).collect())
}

/// Median-of-means estimates of `tr(O_i ρ)` from the first `B·K` samples.
pub fn estimate_observables(samples: &[ShadowSample], observables: &[Observable], plan: &EstimationPlan) -> Result<Vec<f64>> {
    let needed = plan.num_samples();
    if needed == 0 {
        return Err(Error::invalid("plan has no samples"));
    }
    if samples.len() < needed {
        return Err(Error::InsufficientSamples { needed, got: samples.len() });
    }
    let used = &samples[..needed];
    observables
        .iter()
        .map(|o| median_of_means(&snapshot_values(used, o)?, plan.groups))
        .collect()
}

/// Ordered-tuple cap for dense multilinear U-statistics.
const MAX_TUPLES: f64 = 5e6;
const MAX_MULTILINEAR_DIM: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub enum PolynomialTarget {
    /// `tr(ρ²)`, via `tr(SWAP · σ̂_i ⊗ σ̂_j) = tr(σ̂_i σ̂_j)`.
    Purity,
    /// `tr(O ρ^{⊗k})` for an operator `O` on `k` copies.
    Multilinear { operator: CMatrix, degree: usize },
}

/// U-statistic over distinct ordered index tuples.
pub fn estimate_polynomial(samples: &[ShadowSample], target: &PolynomialTarget) -> Result<f64> {
    let ensemble = common_ensemble(samples)?;
    let n = ensemble.num_qubits();
    let snaps = samples.par_iter().map(snapshot).collect::<Result<Vec<Snapshot>>>()?;
    let big_n = snaps.len();
    match target {
        PolynomialTarget::Purity => {
            if big_n < 2 {
                return Err(Error::InsufficientSamples { needed: 2, got: big_n });
            }
            let total: f64 = (0..big_n)
                .into_par_iter()
                .map(|i| {
                    let mut acc = 0.0;
                    for j in i + 1..big_n {
                        acc += snaps[i].overlap(&snaps[j])?;
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .sum();
            Ok(total / (big_n as f64 * (big_n as f64 - 1.0) / 2.0))
        }
        PolynomialTarget::Multilinear { operator, degree } => {
            let k = *degree;
            if k == 0 {
                return Err(Error::invalid("degree must be at least 1"));
            }
            if big_n < k {
                return Err(Error::InsufficientSamples { needed: k, got: big_n });
            }
            let dim = 1usize.checked_shl((n * k) as u32).filter(|&d| d <= MAX_MULTILINEAR_DIM).ok_or_else(|| {
                Error::TooManyQubits { requested: n * k, limit: MAX_MULTILINEAR_DIM.trailing_zeros() as usize }
            })?;
            if operator.nrows() != dim || operator.ncols() != dim {
                return Err(Error::DimensionMismatch(format!("operator must be {dim}x{dim}")));
            }
            let tuples: f64 = (0..k).map(|i| (big_n - i) as f64).product();
            if tuples > MAX_TUPLES {
                return Err(Error::invalid(format!("{tuples} index tuples exceed the enumeration cap")));
            }
            let mats = snaps.iter().map(Snapshot::to_matrix).collect::<Result<Vec<_>>>()?;
            let mut total = 0.0;
            let mut idx = Vec::with_capacity(k);
            multilinear_sum(&mats, operator, k, &mut idx, &mut total);
            Ok(total / tuples)
        }
    }
}

fn multilinear_sum(mats: &[CMatrix], op: &CMatrix, k: usize, idx: &mut Vec<usize>, total: &mut f64) {
    if idx.len() == k {
        let prod = idx[1..].iter().fold(mats[idx[0]].clone(), |acc, &i| linalg::kron(&acc, &mats[i]));
        *total += linalg::trace(&(op * prod)).re;
        return;
    }
    for i in 0..mats.len() {
        if !idx.contains(&i) {
            idx.push(i);
            multilinear_sum(mats, op, k, idx, total);
            idx.pop();
        }
    }
}

/// `3 tr(O²)`, an upper bound on the shadow norm of the traceless part.
pub fn shadow_norm_bound(o: &Observable) -> f64 {
    3.0 * o.trace_sq()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub mean: f64,
    pub variance: f64,
    /// Standard error of `variance` from the fourth central moment.
    pub variance_stderr: f64,
    pub bound: f64,
}

impl VarianceReport {
    /// Whether the variance is below the bound up to `sigmas` standard errors.
    pub fn within_bound(&self, sigmas: f64) -> bool {
        self.variance <= self.bound + sigmas * self.variance_stderr
    }
}

/// Empirical variance of the single-snapshot estimator `tr(O σ̂)`.
pub fn snapshot_variance(samples: &[ShadowSample], o: &Observable) -> Result<VarianceReport> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: samples.len() });
    }
    let values = snapshot_values(samples, o)?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    Ok(VarianceReport {
        mean,
        variance: m2 * n / (n - 1.0),
        variance_stderr: ((m4 - m2 * m2).max(0.0) / n).sqrt(),
        bound: shadow_norm_bound(o),
    })
}

/// Entrywise mean of the snapshot matrices.
pub fn mean_snapshot(samples: &[ShadowSample]) -> Result<CMatrix> {
    let ensemble = common_ensemble(samples)?;
    let d = 1usize << ensemble.num_qubits();
    let sum = samples
        .par_chunks(1024)
        .map(|chunk| {
            let mut acc = CMatrix::zeros(d, d);
            for s in chunk {
                acc += snapshot(s)?.to_matrix()?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(CMatrix::zeros(d, d), |a, b| a + b);
    Ok(sum / num_complex::Complex64::new(samples.len() as f64, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_hand_values() {
        let o = Observable::pauli("ZI").unwrap();
        let p = plan_estimation(std::slice::from_ref(&o), 0.5, 0.5, PlanMode::Global).unwrap();
        assert_eq!(p.batch_size, 480);
        assert_eq!(p.groups, 3);
        let q = plan_estimation(&[o.clone()], 1.0, 0.5, PlanMode::Global).unwrap();
        assert_eq!(q.batch_size, 120);
        let l = plan_estimation(&[o.clone()], 1.0, 0.5, PlanMode::Local).unwrap();
        assert_eq!(l.batch_size, 120);
        assert!(plan_estimation(&[o.clone()], 0.0, 0.5, PlanMode::Global).is_err());
        assert!(plan_estimation(&[o.clone()], 0.1, 1.0, PlanMode::Global).is_err());
        assert!(plan_estimation(&[], 0.1, 0.1, PlanMode::Global).is_err());
        let big = Observable::weighted(&[(2.0, "Z")]).unwrap();
        assert!(plan_estimation(&[big], 0.1, 0.1, PlanMode::Local).is_err());
    }

    #[test]
    fn median_of_means_cases() {
        let v = [1.0, 2.0, 3.0, 4.0, 100.0, 100.0, 5.0];
        assert_eq!(median_of_means(&v, 1).unwrap(), v.iter().sum::<f64>() / 7.0);
        // groups of 2: means 1.5, 3.5, 100
        assert_eq!(median_of_means(&v, 3).unwrap(), 3.5);
        assert_eq!(median_of_means(&[1.0, 3.0], 2).unwrap(), 2.0);
        assert!(median_of_means(&v, 8).is_err());
        assert!(median_of_means(&v, 0).is_err());
    }

    #[test]
    fn norm_bound_values() {
        assert_eq!(shadow_norm_bound(&Observable::pauli("Z").unwrap()), 6.0);
        let zero = Observable::dense(CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(shadow_norm_bound(&zero), 0.0);
    }
}
