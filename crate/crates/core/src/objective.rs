//! The finite-sum problem interface.
//!
//! An [`Objective`] is `f(x) = (1/n) Σ f_i(x)` exposed one component at a
//! time. Zeroth-order methods need nothing more. First-order methods need a
//! [`Differentiable`] objective, which adds exact per-component gradients.
//! Both must be pure: identical `(i, x)` must give identical bits, and
//! calls may come from several threads at once.

use crate::error::{Result, VamoError};
use crate::ledger::QueryLedger;
use crate::minibatch::Minibatch;
use crate::vector::ParamVector;

pub trait Objective: Sync {
    fn num_samples(&self) -> usize;

    fn dim(&self) -> usize;

    fn value(&self, i: usize, x: &[f64]) -> f64;

    /// Smoothness constant `L`, when the construction fixes it.
    fn smoothness(&self) -> Option<f64> {
        None
    }

    /// Gradient-variance bound `σ²`, when known.
    fn variance_bound(&self) -> Option<f64> {
        None
    }

    /// Exact gradients, if this objective has them. Used for monitoring and
    /// by the gradient self-check, never charged to a ledger.
    fn as_differentiable(&self) -> Option<&dyn Differentiable> {
        None
    }

    /// `f(x)`, summed in ascending index order.
    fn full_value(&self, x: &[f64]) -> f64 {
        let n = self.num_samples();
        (0..n).map(|i| self.value(i, x)).sum::<f64>() / n as f64
    }
}

pub trait Differentiable: Objective {
    fn gradient(&self, i: usize, x: &[f64]) -> ParamVector;

    /// Whether a central difference with step `h` around `x` stays on one
    /// smooth piece of `f_i`. Piecewise-smooth models (ReLU) override this
    /// so that probes straddling a kink are skipped.
    fn is_smooth_near(&self, _i: usize, _x: &[f64], _h: f64) -> bool {
        true
    }

    fn full_gradient(&self, x: &[f64]) -> ParamVector {
        let n = self.num_samples();
        let mut acc = ParamVector::zeros(self.dim());
        for i in 0..n {
            acc.add_assign(&self.gradient(i, x));
        }
        acc.div_count(n);
        acc
    }
}

/// `∇f_I(x)`: mean of exact component gradients over `batch`, accumulated in
/// ascending index order. Charges `b` forward and `b` backward passes.
pub fn batch_gradient<O: Differentiable + ?Sized>(
    obj: &O,
    batch: &Minibatch,
    x: &[f64],
    ledger: &QueryLedger,
) -> ParamVector {
    let mut acc = ParamVector::zeros(obj.dim());
    for i in batch.sorted() {
        acc.add_assign(&obj.gradient(i, x));
    }
    acc.div_count(batch.len());
    ledger.charge_fo_minibatch(batch.len() as u64);
    acc
}

/// Evaluates `f_i(x)` and rejects NaN or infinite results.
pub(crate) fn checked_value<O: Objective + ?Sized>(obj: &O, i: usize, x: &[f64]) -> Result<f64> {
    let v = obj.value(i, x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(VamoError::Evaluation { sample: i, point: x.to_vec() })
    }
}

/// Outcome of a central-finite-difference gradient check.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientCheck {
    /// Largest `‖g − g_fd‖ / max(‖g‖, ‖g_fd‖, floor)` over accepted probes.
    pub max_relative_error: f64,
    pub probes_checked: usize,
    pub probes_skipped: usize,
}

impl GradientCheck {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.probes_checked > 0 && self.max_relative_error <= tolerance
    }
}

/// Compares exact gradients against central differences at `(i, x)` probes.
///
/// Each coordinate uses step `h_j = step · max(1, |x_j|)`. Probes the
/// objective reports as non-smooth within the largest step are skipped.
pub fn check_gradient<O: Differentiable + ?Sized>(
    obj: &O,
    probes: &[(usize, ParamVector)],
    step: f64,
) -> GradientCheck {
    let mut out = GradientCheck { max_relative_error: 0.0, probes_checked: 0, probes_skipped: 0 };
    for (i, x) in probes {
        let h_max = x.iter().fold(1.0f64, |m, v| m.max(v.abs())) * step;
        if !obj.is_smooth_near(*i, x, h_max) {
            out.probes_skipped += 1;
            continue;
        }
        let exact = obj.gradient(*i, x);
        let mut fd = ParamVector::zeros(x.dim());
        let mut probe = x.clone();
        for j in 0..x.dim() {
            let h = step * x[j].abs().max(1.0);
            let orig = probe[j];
            probe[j] = orig + h;
            let up = obj.value(*i, &probe);
            probe[j] = orig - h;
            let down = obj.value(*i, &probe);
            probe[j] = orig;
            fd[j] = (up - down) / (2.0 * h);
        }
        let scale = exact.norm().max(fd.norm()).max(1e-12);
        let err = exact.sub(&fd).norm() / scale;
        out.max_relative_error = out.max_relative_error.max(err);
        out.probes_checked += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// f_i(x) = (i+1) · Σ x_j³
    struct Cubic;

    impl Objective for Cubic {
        fn num_samples(&self) -> usize {
            3
        }
        fn dim(&self) -> usize {
            4
        }
        fn value(&self, i: usize, x: &[f64]) -> f64 {
            (i + 1) as f64 * x.iter().map(|v| v * v * v).sum::<f64>()
        }
    }

    impl Differentiable for Cubic {
        fn gradient(&self, i: usize, x: &[f64]) -> ParamVector {
            x.iter().map(|v| 3.0 * (i + 1) as f64 * v * v).collect()
        }
    }

    /// Same values, wrong gradient.
    struct BadCubic;

    impl Objective for BadCubic {
        fn num_samples(&self) -> usize {
            3
        }
        fn dim(&self) -> usize {
            4
        }
        fn value(&self, i: usize, x: &[f64]) -> f64 {
            Cubic.value(i, x)
        }
    }

    impl Differentiable for BadCubic {
        fn gradient(&self, i: usize, x: &[f64]) -> ParamVector {
            let mut g = Cubic.gradient(i, x);
            g[0] *= 1.01;
            g
        }
    }

    fn probes() -> Vec<(usize, ParamVector)> {
        vec![
            (0, ParamVector::from_vec(vec![0.3, -1.2, 2.0, 0.7])),
            (2, ParamVector::from_vec(vec![-0.5, 0.1, 1.5, -2.0])),
        ]
    }

    #[test]
    fn finite_differences_accept_correct_gradient() {
        let c = check_gradient(&Cubic, &probes(), 1e-5);
        assert!(c.passes(1e-8), "{c:?}");
    }

    #[test]
    fn finite_differences_reject_wrong_gradient() {
        let c = check_gradient(&BadCubic, &probes(), 1e-5);
        assert!(!c.passes(1e-5), "{c:?}");
    }

    #[test]
    fn batch_gradient_charges_and_averages() {
        let ledger = QueryLedger::new();
        let x = [1.0, 1.0, 1.0, 1.0];
        let mb = Minibatch::from_indices(vec![2, 0], 3, crate::SamplingMode::WithReplacement).unwrap();
        let g = batch_gradient(&Cubic, &mb, &x, &ledger);
        assert_eq!(g.as_slice(), &[6.0; 4]);
        assert_eq!((ledger.forward_passes(), ledger.backward_passes()), (2, 2));
    }

    #[test]
    fn full_batch_gradient_matches_full_gradient_bitwise() {
        let ledger = QueryLedger::new();
        let x = [0.1, -0.2, 0.3, 0.4];
        let g = batch_gradient(&Cubic, &Minibatch::full(3), &x, &ledger);
        assert_eq!(g, Cubic.full_gradient(&x));
    }
}
