//! Tiny objectives shared by unit tests.

use crate::objective::{Differentiable, Objective};
use crate::vector::ParamVector;

pub struct Constant {
    pub value: f64,
    pub dim: usize,
}

impl Objective for Constant {
    fn num_samples(&self) -> usize {
        4
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _i: usize, _x: &[f64]) -> f64 {
        self.value
    }
}

impl Differentiable for Constant {
    fn gradient(&self, _i: usize, _x: &[f64]) -> ParamVector {
        ParamVector::zeros(self.dim)
    }
}

/// `f_i(x) = a·x + c` for every `i`.
pub struct Affine {
    pub slope: Vec<f64>,
    pub offset: f64,
}

impl Objective for Affine {
    fn num_samples(&self) -> usize {
        3
    }
    fn dim(&self) -> usize {
        self.slope.len()
    }
    fn value(&self, _i: usize, x: &[f64]) -> f64 {
        self.slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.offset
    }
}

/// `f_i(x) = (i+1) Σ x_j⁴ / 4`
pub struct Quartic {
    pub dim: usize,
}

impl Objective for Quartic {
    fn num_samples(&self) -> usize {
        2
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, i: usize, x: &[f64]) -> f64 {
        (i + 1) as f64 * x.iter().map(|v| v.powi(4)).sum::<f64>() / 4.0
    }
}

/// Finite everywhere except sample 2, which is NaN.
pub struct Blowup {
    pub dim: usize,
}

impl Objective for Blowup {
    fn num_samples(&self) -> usize {
        3
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, i: usize, x: &[f64]) -> f64 {
        if i == 2 {
            f64::NAN
        } else {
            x.iter().sum()
        }
    }
}
