//! Rank-one structure of `X = V V^H`: every 2x2 minor vanishes.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// `V V^H`.
pub fn outer(v: &[Complex64]) -> DMatrix<Complex64> {
    let n = v.len();
    DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

/// Largest modulus over all 2x2 minors `X_ij X_kl - X_il X_kj`, relative to
/// the squared largest entry modulus.
pub fn max_minor_modulus(x: &DMatrix<Complex64>) -> f64 {
    let n = x.nrows();
    let scale = x.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for k in i + 1..n {
            for j in 0..n {
                for l in j + 1..n {
                    let m = x[(i, j)] * x[(k, l)] - x[(i, l)] * x[(k, j)];
                    worst = worst.max(m.norm());
                }
            }
        }
    }
    worst / (scale * scale)
}

/// `c^2 + s^2 - c_ii c_jj`, zero on rank-one points.
pub fn edge_rank_residual(cii: f64, cjj: f64, c: f64, s: f64) -> f64 {
    c * c + s * s - cii * cjj
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_has_vanishing_minors() {
        let v = [Complex64::new(1.0, 0.2), Complex64::new(-0.3, 0.9), Complex64::new(0.5, -0.5)];
        assert!(max_minor_modulus(&outer(&v)) < 1e-15);
    }

    #[test]
    fn identity_has_a_unit_minor() {
        let x = DMatrix::<Complex64>::identity(3, 3);
        assert!((max_minor_modulus(&x) - 1.0).abs() < 1e-15);
    }
}
