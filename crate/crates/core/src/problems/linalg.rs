//! Small dense helpers for the problem constructors.

use rand_distr::{Distribution, StandardNormal};

use crate::rng::RngStream;

/// A Haar-ish random orthogonal matrix (row-major) from modified
/// Gram–Schmidt on a Gaussian matrix.
pub(crate) fn random_orthogonal(d: usize, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let mut q: Vec<f64> = (0..d * d).map(|_| StandardNormal.sample(&mut *rng)).collect();
        if gram_schmidt_columns(&mut q, d) {
            return q;
        }
    }
}

// Orthonormalizes the columns in place; false if a column collapsed.
fn gram_schmidt_columns(a: &mut [f64], d: usize) -> bool {
    for k in 0..d {
        for j in 0..k {
            let dot: f64 = (0..d).map(|r| a[r * d + j] * a[r * d + k]).sum();
            for r in 0..d {
                a[r * d + k] -= dot * a[r * d + j];
            }
        }
        let norm = (0..d).map(|r| a[r * d + k].powi(2)).sum::<f64>().sqrt();
        if norm < 1e-10 {
            return false;
        }
        for r in 0..d {
            a[r * d + k] /= norm;
        }
    }
    true
}

/// `Q diag(λ) Qᵀ`, symmetrized exactly.
pub(crate) fn rotate_spectrum(q: &[f64], eigenvalues: &[f64]) -> Vec<f64> {
    let d = eigenvalues.len();
    let mut h = vec![0.0; d * d];
    for r in 0..d {
        for c in r..d {
            let v: f64 = (0..d).map(|k| q[r * d + k] * eigenvalues[k] * q[c * d + k]).sum();
            h[r * d + c] = v;
            h[c * d + r] = v;
        }
    }
    h
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub(crate) fn symmetric_eigenvalues(a: &[f64], d: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|r| (0..d).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| m[r * d + c].powi(2))
            .sum();
        let scale: f64 = m.iter().map(|v| v * v).sum();
        if off <= 1e-30 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = m[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * d + q] - m[p * d + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = m[k * d + p];
                    let akq = m[k * d + q];
                    m[k * d + p] = c * akp - s * akq;
                    m[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = m[p * d + k];
                    let aqk = m[q * d + k];
                    m[p * d + k] = c * apk - s * aqk;
                    m[q * d + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..d).map(|i| m[i * d + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Purpose;

    #[test]
    fn orthogonal_columns() {
        let d = 6;
        let q = random_orthogonal(d, &mut RngStream::new(1, Purpose::DataGeneration));
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = (0..d).map(|r| q[r * d + i] * q[r * d + j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_recovers_rotated_spectrum() {
        let d = 7;
        let q = random_orthogonal(d, &mut RngStream::new(2, Purpose::DataGeneration));
        let lam = [0.1, 5.0, -2.0, 3.3, 0.0, 1.0, 2.5];
        let mut got = symmetric_eigenvalues(&rotate_spectrum(&q, &lam), d);
        got.sort_by(f64::total_cmp);
        let mut want = lam.to_vec();
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "{got:?}");
        }
    }
}
