//! Amplitude-block kernel for applying a k-qubit matrix.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::linalg::CMatrix;

/// States at or above this size are updated out of place in parallel.
const PARALLEL_QUBITS: usize = 14;

/// Bit position (counted from the least significant end) of qubit `q`.
#[inline]
pub(crate) fn shift_of(num_qubits: usize, q: usize) -> usize {
    num_qubits - 1 - q
}

/// Spreads the bits of `r` over the positions not listed in `sorted_shifts`.
#[inline]
pub(crate) fn insert_zero_bits(mut r: usize, sorted_shifts: &[usize]) -> usize {
    for &s in sorted_shifts {
        let low = r & ((1 << s) - 1);
        r = ((r >> s) << (s + 1)) | low;
    }
    r
}

struct Layout {
    dim: usize,
    offsets: Vec<usize>,
    mask: usize,
}

fn layout(num_qubits: usize, targets: &[usize]) -> Layout {
    let k = targets.len();
    let shifts: Vec<usize> = targets.iter().map(|&q| shift_of(num_qubits, q)).collect();
    let dim = 1usize << k;
    let offsets = (0..dim)
        .map(|l| {
            (0..k)
                .map(|j| ((l >> (k - 1 - j)) & 1) << shifts[j])
                .sum()
        })
        .collect();
    let mask = shifts.iter().map(|s| 1usize << s).sum();
    Layout { dim, offsets, mask }
}

/// Applies `matrix` (dimension `2^targets.len()`) to `amps`. Targets must be
/// distinct and in range; the caller validates.
pub(crate) fn apply_matrix(amps: &mut Vec<C64>, num_qubits: usize, matrix: &CMatrix, targets: &[usize]) {
    let lay = layout(num_qubits, targets);
    let dim = lay.dim;
    let entries: Vec<C64> = (0..dim * dim).map(|i| matrix[(i / dim, i % dim)]).collect();

    if num_qubits >= PARALLEL_QUBITS {
        let src: &Vec<C64> = amps;
        let out: Vec<C64> = (0..src.len())
            .into_par_iter()
            .map(|idx| {
                let base = idx & !lay.mask;
                let row = lay.offsets.iter().position(|&o| o == idx & lay.mask).unwrap_or(0);
                let mut acc = C64::new(0.0, 0.0);
                for col in 0..dim {
                    acc += entries[row * dim + col] * src[base + lay.offsets[col]];
                }
                acc
            })
            .collect();
        *amps = out;
        return;
    }

    let mut sorted: Vec<usize> = targets.iter().map(|&q| shift_of(num_qubits, q)).collect();
    sorted.sort_unstable();
    let mut buf = vec![C64::new(0.0, 0.0); dim];
    for r in 0..(amps.len() >> targets.len()) {
        let base = insert_zero_bits(r, &sorted);
        for (l, b) in buf.iter_mut().enumerate() {
            *b = amps[base + lay.offsets[l]];
        }
        for row in 0..dim {
            let mut acc = C64::new(0.0, 0.0);
            for col in 0..dim {
                acc += entries[row * dim + col] * buf[col];
            }
            amps[base + lay.offsets[row]] = acc;
        }
    }
}
