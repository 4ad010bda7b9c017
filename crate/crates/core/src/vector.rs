//! Dense parameter vectors.
//!
//! Every iterate, checkpoint and gradient-like quantity in the crate is a
//! [`ParamVector`]: a contiguous `Vec<f64>` whose length stays fixed for the
//! lifetime of a run. Arithmetic between vectors of different lengths is a
//! programming error and panics; the few public entry points that accept
//! caller-built vectors check dimensions and return
//! [`VamoError::DimensionMismatch`](crate::VamoError::DimensionMismatch)
//! instead.

use std::ops::{Deref, DerefMut};

use crate::error::{Result, VamoError};

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn zeros(dim: usize) -> Self {
        ParamVector(vec![0.0; dim])
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        ParamVector(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        assert_eq!(self.dim(), other.len(), "dot: dimension mismatch");
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|a| a.is_finite())
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &[f64]) {
        assert_eq!(self.dim(), other.len(), "axpy: dimension mismatch");
        for (s, o) in self.0.iter_mut().zip(other) {
            *s += a * o;
        }
    }

    pub fn add_assign(&mut self, other: &[f64]) {
        assert_eq!(self.dim(), other.len(), "add: dimension mismatch");
        for (s, o) in self.0.iter_mut().zip(other) {
            *s += o;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for s in &mut self.0 {
            *s *= a;
        }
    }

    /// Divides every entry by `count`. Used for all finite-sum means so that
    /// a minibatch covering `[n]` reproduces the full mean bit for bit.
    pub fn div_count(&mut self, count: usize) {
        let c = count as f64;
        for s in &mut self.0 {
            *s /= c;
        }
    }

    pub fn sub(&self, other: &[f64]) -> ParamVector {
        assert_eq!(self.dim(), other.len(), "sub: dimension mismatch");
        ParamVector(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    pub fn dist_sq(&self, other: &[f64]) -> f64 {
        assert_eq!(self.dim(), other.len(), "dist: dimension mismatch");
        self.0.iter().zip(other).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(VamoError::DimensionMismatch { expected, found: self.dim() })
        }
    }
}

impl Deref for ParamVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParamVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(values: Vec<f64>) -> Self {
        ParamVector(values)
    }
}

impl FromIterator<f64> for ParamVector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        ParamVector(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let mut a = ParamVector::from_vec(vec![1.0, 2.0, 2.0]);
        assert_eq!(a.norm(), 3.0);
        a.axpy(-2.0, &[0.5, 1.0, 1.0]);
        assert_eq!(a.as_slice(), &[0.0, 0.0, 0.0]);
        assert_eq!(ParamVector::from_vec(vec![3.0]).sub(&[1.0]).as_slice(), &[2.0]);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn mismatched_axpy_panics() {
        ParamVector::zeros(2).axpy(1.0, &[1.0]);
    }

    #[test]
    fn checked_dimension() {
        let v = ParamVector::zeros(3);
        assert!(v.check_dim(3).is_ok());
        assert!(matches!(v.check_dim(4), Err(VamoError::DimensionMismatch { expected: 4, found: 3 })));
    }
}
