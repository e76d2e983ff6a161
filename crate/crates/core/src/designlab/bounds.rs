use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityBound {
    /// `min(md/(2n²) − 2m, 2^{n+1} − 2) / 15`.
    pub thm1_bound: f64,
    /// `md/(2n²) − m(1 + 1/n + 1/n²) − 1`.
    pub l_value: f64,
    /// True when `m ≥ n ≥ 4`, the range where the bound is claimed.
    pub in_domain: bool,
}

pub fn complexity_bound(m: usize, n: usize, d: usize) -> ComplexityBound {
    let (mf, nf, df) = (m as f64, n as f64, d as f64);
    let ratio = if n == 0 { f64::INFINITY } else { mf * df / (2.0 * nf * nf) };
    let cap = 2f64.powi(n as i32 + 1) - 2.0;
    let l_value = if n == 0 { f64::NAN } else { ratio - mf * (1.0 + 1.0 / nf + 1.0 / (nf * nf)) - 1.0 };
    ComplexityBound { thm1_bound: (ratio - 2.0 * mf).min(cap) / 15.0, l_value, in_domain: m >= n && n >= 4 }
}

/// Brickwork depth overhead of the swap ladder that routes the output qubits
/// into place: `2(n² + n)`.
pub fn swap_ladder_layers(n: usize) -> usize {
    2 * (n * n + n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let b = complexity_bound(4, 4, 160);
        assert!((b.thm1_bound - 0.8).abs() < 1e-15);
        assert!((b.l_value - 13.75).abs() < 1e-15);
        assert!(b.in_domain);
        let z = complexity_bound(5, 4, 0);
        assert!(z.thm1_bound < 0.0 && z.l_value < 0.0 && z.in_domain);
        assert!(!complexity_bound(4, 2, 10).in_domain);
        assert_eq!(swap_ladder_layers(4), 40);
    }
}
