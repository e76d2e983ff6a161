//! Uniform sampling of the Clifford group (Bravyi–Maslov canonical form).

use rand::Rng;

use super::{CliffordCircuit, CliffordTableau};

type BinMat = Vec<Vec<bool>>;

fn zeros(n: usize) -> BinMat {
    vec![vec![false; n]; n]
}

fn eye(n: usize) -> BinMat {
    (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect()
}

fn matmul(a: &BinMat, b: &BinMat) -> BinMat {
    let rows = a.len();
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    (0..rows)
        .map(|i| (0..cols).map(|j| (0..inner).fold(false, |acc, k| acc ^ (a[i][k] & b[k][j]))).collect())
        .collect()
}

fn transpose(a: &BinMat) -> BinMat {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i]).collect()).collect()
}

/// Inverse of a unit lower-triangular matrix by forward substitution.
fn inverse_unit_lower(a: &BinMat) -> BinMat {
    let n = a.len();
    let mut inv = eye(n);
    for col in 0..n {
        for i in col + 1..n {
            let v = (col..i).fold(false, |acc, k| acc ^ (a[i][k] & inv[k][col]));
            inv[i][col] = v;
        }
    }
    inv
}

/// Hadamard pattern and permutation from the quantum Mallows distribution.
fn sample_qmallows<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (Vec<bool>, Vec<usize>) {
    let mut had = vec![false; n];
    let mut perm = vec![0usize; n];
    let mut inds: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let m = n - i;
        let eps = 4f64.powi(-(m as i32));
        let r: f64 = rng.random();
        let index = ((-(r + (1.0 - r) * eps).log2().ceil()) as usize).min(2 * m - 1);
        had[i] = index < m;
        let k = if index < m { index } else { 2 * m - index - 1 };
        perm[i] = inds.remove(k);
    }
    (had, perm)
}

fn fill_lower<R: Rng + ?Sized>(mat: &mut BinMat, rng: &mut R, symmetric: bool) {
    let n = mat.len();
    for i in 0..n {
        for j in 0..i {
            mat[i][j] = rng.random();
            if symmetric {
                mat[j][i] = mat[i][j];
            }
        }
    }
}

fn block(tl: &BinMat, tr: &BinMat, bl: &BinMat, br: &BinMat) -> BinMat {
    let top = tl.iter().zip(tr).map(|(a, b)| a.iter().chain(b).copied().collect());
    let bottom = bl.iter().zip(br).map(|(a, b)| a.iter().chain(b).copied().collect());
    top.chain(bottom).collect()
}

pub fn random_clifford_tableau<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CliffordTableau {
    let (had, perm) = sample_qmallows(n, rng);

    let mut gamma1 = zeros(n);
    for (i, row) in gamma1.iter_mut().enumerate() {
        row[i] = rng.random();
    }
    fill_lower(&mut gamma1, rng, true);
    let mut gamma2 = zeros(n);
    for (i, row) in gamma2.iter_mut().enumerate() {
        row[i] = rng.random();
    }
    fill_lower(&mut gamma2, rng, true);
    let mut delta1 = eye(n);
    fill_lower(&mut delta1, rng, false);
    let mut delta2 = eye(n);
    fill_lower(&mut delta2, rng, false);

    let zero = zeros(n);
    let table1 = block(&delta1, &zero, &matmul(&gamma1, &delta1), &transpose(&inverse_unit_lower(&delta1)));
    let table2 = block(&delta2, &zero, &matmul(&gamma2, &delta2), &transpose(&inverse_unit_lower(&delta2)));

    let mut table: BinMat = perm
        .iter()
        .map(|&p| table2[p].clone())
        .chain(perm.iter().map(|&p| table2[n + p].clone()))
        .collect();
    for i in 0..n {
        if had[i] {
            table.swap(i, n + i);
        }
    }
    let symplectic = matmul(&table1, &table);
    let signs: Vec<bool> = (0..2 * n).map(|_| rng.random()).collect();
    CliffordTableau::from_symplectic(&symplectic, &signs).expect("canonical form is symplectic")
}

/// Uniformly random Clifford group element as an `{H, S, CX}` circuit.
pub fn random_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CliffordCircuit {
    random_clifford_tableau(n, rng)
        .to_circuit()
        .expect("sampled tableau is symplectic")
}
