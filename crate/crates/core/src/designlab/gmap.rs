use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cliffordsim::PauliString;
use crate::ensembles::{declared_volume, layer_pairs};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::rng::StreamRng;
use crate::statevector::StateVector;

pub const GENERATORS: usize = 15;
const RANK_REL_TOL: f64 = 1e-8;
const DEGENERATE_NORM: f64 = 1e-12;
const MAX_RESAMPLES: usize = 20;

/// The fifteen non-identity two-qubit Paulis, `IX` through `ZZ`.
fn generators() -> &'static [CMatrix] {
    static GENS: std::sync::OnceLock<Vec<CMatrix>> = std::sync::OnceLock::new();
    GENS.get_or_init(|| {
        let letters = ['I', 'X', 'Y', 'Z'];
        (1..16)
            .map(|k| {
                let label: String = [letters[k / 4], letters[k % 4]].iter().collect();
                PauliString::parse(&label).and_then(|p| p.to_matrix()).expect("valid label")
            })
            .collect()
    })
}

fn hamiltonian(theta: &[f64; GENERATORS]) -> CMatrix {
    generators()
        .iter()
        .zip(theta)
        .fold(CMatrix::zeros(4, 4), |acc, (g, &c)| acc + g * C64::new(c, 0.0))
}

/// `exp(i Σ_k θ_k P_k)` and the derivatives along each `P_k`.
fn gate_and_derivatives(theta: &[f64; GENERATORS]) -> (CMatrix, Vec<CMatrix>) {
    let (lambda, v) = linalg::hermitian_eigen(&hamiltonian(theta));
    let vh = v.adjoint();
    let phases: Vec<C64> = lambda.iter().map(|&l| C64::new(0.0, l).exp()).collect();
    let u = &v * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(phases.clone())) * &vh;
    // Divided differences of e^{iλ}.
    let f = CMatrix::from_fn(4, 4, |a, b| {
        let (la, lb) = (lambda[a], lambda[b]);
        if (la - lb).abs() < 1e-9 {
            C64::new(0.0, 1.0) * C64::new(0.0, 0.5 * (la + lb)).exp()
        } else {
            (phases[a] - phases[b]) / (la - lb)
        }
    });
    let derivs = generators()
        .iter()
        .map(|g| {
            let e = &vh * g * &v;
            &v * e.component_mul(&f) * &vh
        })
        .collect();
    (u, derivs)
}

pub fn gate_from_coords(theta: &[f64; GENERATORS]) -> CMatrix {
    linalg::expm_i_hermitian(&hamiltonian(theta))
}

/// Qubit pairs of every gate in an `(m, d)` brickwork, layer by layer.
pub fn gate_layout(m: usize, d: usize) -> Vec<(usize, (usize, usize))> {
    (0..d)
        .flat_map(|layer| layer_pairs(m, (layer % 2) as u8).into_iter().map(move |p| (layer, p)))
        .collect()
}

/// A point of the map `G`: one coordinate vector per gate of the `(m, d)`
/// brickwork and the cached post-selected output.
#[derive(Clone, Debug, PartialEq)]
pub struct GPoint {
    m: usize,
    n: usize,
    d: usize,
    params: Vec<[f64; GENERATORS]>,
    output: Vec<C64>,
}

fn check_shape(m: usize, n: usize) -> Result<()> {
    if m < 2 || n == 0 || n > m {
        return Err(Error::invalid(format!("need m >= 2 and 1 <= n <= m, got m={m}, n={n}")));
    }
    if m > crate::statevector::max_qubits() {
        return Err(Error::TooManyQubits { requested: m, limit: crate::statevector::max_qubits() });
    }
    Ok(())
}

impl GPoint {
    pub fn new(m: usize, n: usize, d: usize, params: Vec<[f64; GENERATORS]>) -> Result<Self> {
        check_shape(m, n)?;
        let gates = gate_layout(m, d).len();
        if params.len() != gates {
            return Err(Error::DimensionMismatch(format!("{} coordinate vectors for {gates} gates", params.len())));
        }
        let mut p = Self { m, n, d, params, output: Vec::new() };
        p.output = p.compute()?;
        Ok(p)
    }

    /// Gaussian coordinates, one vector per gate.
    pub fn random<R: Rng + ?Sized>(m: usize, n: usize, d: usize, rng: &mut R) -> Result<Self> {
        let gates = gate_layout(m, d).len();
        let params = (0..gates)
            .map(|_| std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal)))
            .collect();
        Self::new(m, n, d, params)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn params(&self) -> &[[f64; GENERATORS]] {
        &self.params
    }

    pub fn output(&self) -> &[C64] {
        &self.output
    }

    /// `⌊m/2⌋ d`.
    pub fn declared_volume(&self) -> usize {
        declared_volume(self.m, self.d)
    }

    /// Number of real coordinates, `15` per gate actually placed.
    pub fn num_coords(&self) -> usize {
        GENERATORS * self.params.len()
    }

    fn compute(&self) -> Result<Vec<C64>> {
        let mut s = StateVector::zero(self.m)?;
        for ((_, (a, b)), theta) in gate_layout(self.m, self.d).iter().zip(&self.params) {
            s.apply_matrix(&gate_from_coords(theta), &[*a, *b])?;
        }
        Ok(self.postselect(&s))
    }

    fn postselect(&self, s: &StateVector) -> Vec<C64> {
        s.amplitudes()[..1 << self.n].to_vec()
    }

    /// Real Jacobian, `2^{n+1}` rows (real parts then imaginary parts) and
    /// one column per gate coordinate.
    pub fn jacobian(&self) -> Result<DMatrix<f64>> {
        let layout = gate_layout(self.m, self.d);
        let mut gates = Vec::with_capacity(layout.len());
        let mut derivs = Vec::with_capacity(layout.len());
        for theta in &self.params {
            let (u, du) = gate_and_derivatives(theta);
            gates.push(u);
            derivs.push(du);
        }
        let mut prefixes = Vec::with_capacity(layout.len());
        let mut s = StateVector::zero(self.m)?;
        for (g, (_, (a, b))) in layout.iter().enumerate() {
            prefixes.push(s.clone());
            s.apply_matrix(&gates[g], &[*a, *b])?;
        }
        let columns: Vec<Vec<C64>> = (0..layout.len() * GENERATORS)
            .into_par_iter()
            .map(|col| {
                let (g, k) = (col / GENERATORS, col % GENERATORS);
                let mut s = prefixes[g].clone();
                s.apply_matrix(&derivs[g][k], &[layout[g].1 .0, layout[g].1 .1])?;
                for (h, (_, (a, b))) in layout.iter().enumerate().skip(g + 1) {
                    s.apply_matrix(&gates[h], &[*a, *b])?;
                }
                Ok(self.postselect(&s))
            })
            .collect::<Result<_>>()?;
        Ok(real_matrix(&columns, 1 << self.n))
    }

    /// Central finite differences of step `h` along every coordinate.
    pub fn jacobian_fd(&self, h: f64) -> Result<DMatrix<f64>> {
        let columns: Vec<Vec<C64>> = (0..self.num_coords())
            .into_par_iter()
            .map(|col| {
                let (g, k) = (col / GENERATORS, col % GENERATORS);
                let shifted = |delta: f64| {
                    let mut p = self.params.clone();
                    p[g][k] += delta;
                    Self::new(self.m, self.n, self.d, p).map(|q| q.output)
                };
                let (plus, minus) = (shifted(h)?, shifted(-h)?);
                Ok(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect())
            })
            .collect::<Result<_>>()?;
        Ok(real_matrix(&columns, 1 << self.n))
    }
}

fn real_matrix(columns: &[Vec<C64>], dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * dim, columns.len(), |r, c| {
        if r < dim { columns[c][r].re } else { columns[c][r - dim].im }
    })
}

/// `(⟨0^{m−n}| ⊗ I) U |0^m⟩` at `point`.
#[allow(non_snake_case)]
pub fn evaluate_G(point: &GPoint) -> &[C64] {
    point.output()
}

/// Singular values, descending.
pub fn singular_values(j: &DMatrix<f64>) -> Vec<f64> {
    if j.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = j.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Count of singular values above `rel_tol · σ_max`.
pub fn numeric_rank(singular: &[f64], rel_tol: f64) -> usize {
    let max = singular.first().copied().unwrap_or(0.0);
    if max == 0.0 {
        return 0;
    }
    singular.iter().filter(|&&s| s > rel_tol * max).count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRank {
    pub rank: usize,
    /// Rank unchanged with the threshold scaled by 10 and by 1/10.
    pub stable: bool,
    pub sigma_max: f64,
    pub output_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccessibleDimension {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub rank: usize,
    pub points: Vec<PointRank>,
    pub resampled: usize,
}

impl AccessibleDimension {
    pub fn unstable_points(&self) -> usize {
        self.points.iter().filter(|p| !p.stable).count()
    }
}

pub fn rank_at(point: &GPoint) -> Result<PointRank> {
    let output_norm = point.output().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let s = singular_values(&point.jacobian()?);
    let rank = numeric_rank(&s, RANK_REL_TOL);
    Ok(PointRank {
        rank,
        stable: numeric_rank(&s, RANK_REL_TOL * 10.0) == rank && numeric_rank(&s, RANK_REL_TOL / 10.0) == rank,
        sigma_max: s.first().copied().unwrap_or(0.0),
        output_norm,
    })
}

/// Maximum Jacobian rank of `G` over `num_points` random points. Points
/// whose output vanishes are redrawn, at most 20 times each.
pub fn accessible_dimension<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    d: usize,
    rng: &mut R,
    num_points: usize,
) -> Result<AccessibleDimension> {
    check_shape(m, n)?;
    if num_points == 0 {
        return Err(Error::invalid("need at least one point"));
    }
    let seeds: Vec<u64> = (0..num_points).map(|_| rng.random()).collect();
    let results: Vec<(PointRank, usize)> = seeds
        .par_iter()
        .map(|&seed| {
            let mut r = StreamRng::seed_from_u64(seed);
            for attempt in 0..=MAX_RESAMPLES {
                let p = GPoint::random(m, n, d, &mut r)?;
                let norm: f64 = p.output().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm > DEGENERATE_NORM {
                    return Ok((rank_at(&p)?, attempt));
                }
            }
            Err(Error::Degenerate(format!("output vanished {} times in a row", MAX_RESAMPLES + 1)))
        })
        .collect::<Result<_>>()?;
    let rank = results.iter().map(|(p, _)| p.rank).max().unwrap_or(0);
    let resampled = results.iter().map(|(_, a)| a).sum();
    Ok(AccessibleDimension { m, n, d, rank, points: results.into_iter().map(|(p, _)| p).collect(), resampled })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn zero_coordinates_give_zero_state() {
        let p = GPoint::new(4, 2, 3, vec![[0.0; GENERATORS]; gate_layout(4, 3).len()]).unwrap();
        assert!((p.output()[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(p.output()[1..].iter().all(|z| z.norm() < 1e-14));
        assert_eq!(p.declared_volume(), 6);
        assert_eq!(p.params().len(), 5);
    }

    #[test]
    fn unitary_when_nothing_measured() {
        let mut r = rng::from_seed(81);
        let p = GPoint::random(3, 3, 4, &mut r).unwrap();
        let norm: f64 = p.output().iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        let q = GPoint::random(4, 1, 4, &mut r).unwrap();
        assert!(q.output().iter().map(|z| z.norm_sqr()).sum::<f64>() <= 1.0 + 1e-12);
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        let mut r = rng::from_seed(82);
        for (m, n, d) in [(2, 1, 2), (3, 2, 3), (4, 2, 2)] {
            let p = GPoint::random(m, n, d, &mut r).unwrap();
            let a = p.jacobian().unwrap();
            let f = p.jacobian_fd(1e-5).unwrap();
            let rel = (&a - &f).norm() / a.norm();
            assert!(rel < 1e-6, "({m},{n},{d}): {rel}");
        }
    }

    #[test]
    fn wrong_parameter_count_rejected() {
        assert!(GPoint::new(3, 1, 2, vec![[0.0; GENERATORS]; 1]).is_err());
    }

    #[test]
    fn rank_is_zero_without_gates() {
        let mut r = rng::from_seed(83);
        let a = accessible_dimension(3, 1, 0, &mut r, 2).unwrap();
        assert_eq!(a.rank, 0);
    }
}
