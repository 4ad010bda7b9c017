use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, VamoError};
use crate::objective::{Differentiable, Objective};
use crate::rng::{Purpose, RngStream};
use crate::vector::ParamVector;

use super::linalg::{random_orthogonal, rotate_spectrum, symmetric_eigenvalues};

/// Eigenvalues given to every component Hessian.
#[derive(Clone, Debug, PartialEq)]
pub enum Spectrum {
    Identity,
    /// Smallest eigenvalue `lo`, largest `hi`, the rest uniform in between.
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// The same eigenvalues for every component, in random orientations.
    Fixed(Vec<f64>),
}

/// `f_i(x) = ½ xᵀH_i x + g_iᵀx + c_i` with symmetric `H_i`.
///
/// The smoothness constant is `L = max_i ‖H_i‖₂` and is known exactly.
#[derive(Clone, Debug)]
pub struct QuadraticProblem {
    dim: usize,
    hessians: Vec<Vec<f64>>,
    linear: Vec<ParamVector>,
    constants: Vec<f64>,
    smoothness: f64,
}

impl QuadraticProblem {
    /// `n` components in dimension `d`, each with a randomly rotated Hessian
    /// and a standard-normal linear term, all drawn from the data stream of
    /// `seed`.
    pub fn generate(dim: usize, n: usize, spectrum: Spectrum, seed: u64) -> Result<Self> {
        if dim == 0 || n == 0 {
            return Err(VamoError::invalid("quadratic needs d >= 1 and n >= 1"));
        }
        let mut rng = RngStream::new(seed, Purpose::DataGeneration);
        let mut hessians = Vec::with_capacity(n);
        let mut smoothness = 0.0f64;
        for _ in 0..n {
            let eig = match &spectrum {
                Spectrum::Identity => vec![1.0; dim],
                Spectrum::Uniform { lo, hi } => {
                    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                        return Err(VamoError::invalid(format!("bad spectrum range [{lo}, {hi}]")));
                    }
                    let mut e: Vec<f64> = (0..dim).map(|_| rng.random_range(*lo..=*hi)).collect();
                    e[0] = *hi;
                    if dim > 1 {
                        e[1] = *lo;
                    }
                    e
                }
                Spectrum::Fixed(e) => {
                    if e.len() != dim {
                        return Err(VamoError::DimensionMismatch { expected: dim, found: e.len() });
                    }
                    e.clone()
                }
            };
            smoothness = smoothness.max(eig.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            let h = match spectrum {
                Spectrum::Identity => identity(dim),
                _ => rotate_spectrum(&random_orthogonal(dim, &mut rng), &eig),
            };
            hessians.push(h);
        }
        if !(smoothness > 0.0 && smoothness.is_finite()) {
            return Err(VamoError::invalid("all Hessians are zero"));
        }
        let linear = (0..n).map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        Ok(QuadraticProblem { dim, hessians, linear, constants: vec![0.0; n], smoothness })
    }

    /// Builds a problem from explicit row-major Hessians, linear terms and
    /// constants. `L` is computed from the Hessian spectra.
    pub fn from_parts(hessians: Vec<Vec<f64>>, linear: Vec<ParamVector>, constants: Vec<f64>) -> Result<Self> {
        let n = hessians.len();
        if n == 0 || linear.len() != n || constants.len() != n {
            return Err(VamoError::invalid("need the same positive number of Hessians, linear terms and constants"));
        }
        let dim = linear[0].dim();
        let mut smoothness = 0.0f64;
        for (h, g) in hessians.iter().zip(&linear) {
            g.check_dim(dim)?;
            if h.len() != dim * dim {
                return Err(VamoError::DimensionMismatch { expected: dim * dim, found: h.len() });
            }
            for r in 0..dim {
                for c in 0..r {
                    if h[r * dim + c] != h[c * dim + r] {
                        return Err(VamoError::invalid("Hessian is not symmetric"));
                    }
                }
            }
            let top = symmetric_eigenvalues(h, dim).into_iter().fold(0.0f64, |m, v| m.max(v.abs()));
            smoothness = smoothness.max(top);
        }
        if !(smoothness > 0.0 && smoothness.is_finite()) {
            return Err(VamoError::invalid("all Hessians are zero"));
        }
        Ok(QuadraticProblem { dim, hessians, linear, constants, smoothness })
    }

    pub fn hessian(&self, i: usize) -> &[f64] {
        &self.hessians[i]
    }

    pub fn linear_term(&self, i: usize) -> &ParamVector {
        &self.linear[i]
    }

    /// `tr((1/n) Σ H_i)`.
    pub fn mean_hessian_trace(&self) -> f64 {
        let d = self.dim;
        let total: f64 = self.hessians.iter().map(|h| (0..d).map(|k| h[k * d + k]).sum::<f64>()).sum();
        total / self.hessians.len() as f64
    }

    /// Exact gradient variance `σ²(x) = (1/n) Σ ‖∇f_i(x) − ∇f(x)‖²`.
    pub fn sigma_sq_at(&self, x: &[f64]) -> f64 {
        let full = self.full_gradient(x);
        let n = self.hessians.len();
        (0..n).map(|i| self.gradient(i, x).dist_sq(&full)).sum::<f64>() / n as f64
    }

    fn hessian_times(&self, i: usize, x: &[f64]) -> ParamVector {
        let d = self.dim;
        let h = &self.hessians[i];
        (0..d).map(|r| h[r * d..(r + 1) * d].iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
}

fn identity(d: usize) -> Vec<f64> {
    let mut h = vec![0.0; d * d];
    for k in 0..d {
        h[k * d + k] = 1.0;
    }
    h
}

impl Objective for QuadraticProblem {
    fn num_samples(&self) -> usize {
        self.hessians.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, i: usize, x: &[f64]) -> f64 {
        0.5 * self.hessian_times(i, x).dot(x) + self.linear[i].dot(x) + self.constants[i]
    }

    fn smoothness(&self) -> Option<f64> {
        Some(self.smoothness)
    }

    fn as_differentiable(&self) -> Option<&dyn Differentiable> {
        Some(self)
    }
}

impl Differentiable for QuadraticProblem {
    fn gradient(&self, i: usize, x: &[f64]) -> ParamVector {
        let mut g = self.hessian_times(i, x);
        g.add_assign(&self.linear[i]);
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_component_has_no_variance() {
        let p = QuadraticProblem::generate(4, 1, Spectrum::Uniform { lo: 0.5, hi: 2.0 }, 3).unwrap();
        assert_eq!(p.sigma_sq_at(&[1.0, -2.0, 0.3, 0.0]), 0.0);
    }

    #[test]
    fn identity_spectrum_has_unit_smoothness() {
        let p = QuadraticProblem::generate(3, 5, Spectrum::Identity, 0).unwrap();
        assert_eq!(p.smoothness(), Some(1.0));
        assert_eq!(p.mean_hessian_trace(), 3.0);
    }

    #[test]
    fn from_parts_checks_symmetry() {
        let g = vec![ParamVector::zeros(2)];
        assert!(QuadraticProblem::from_parts(vec![vec![1.0, 2.0, 0.0, 1.0]], g.clone(), vec![0.0]).is_err());
        let p = QuadraticProblem::from_parts(vec![vec![2.0, 1.0, 1.0, 2.0]], g, vec![0.0]).unwrap();
        assert!((p.smoothness().unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn value_at_origin_is_constant() {
        let p =
            QuadraticProblem::from_parts(vec![vec![1.0]], vec![ParamVector::from_vec(vec![2.0])], vec![0.25]).unwrap();
        assert_eq!(p.value(0, &[0.0]), 0.25);
        assert_eq!(p.value(0, &[2.0]), 0.5 * 4.0 + 4.0 + 0.25);
        assert_eq!(p.gradient(0, &[2.0]).as_slice(), &[4.0]);
    }
}
