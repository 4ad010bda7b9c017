use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::synth_digits;
use crate::error::Result;
use crate::objective::{check_gradient, Differentiable, Objective};
use crate::problems::{MlpClassifier, NonconvexLeastSquares, QuadraticProblem, Spectrum};
use crate::rng::{Purpose, RngStream};
use crate::vector::ParamVector;

use super::report::CheckReport;

/// Finite-difference step used by the gradient gate.
pub const GRADIENT_STEP: f64 = 1e-6;
/// Tolerance for smooth problems.
pub const SMOOTH_TOLERANCE: f64 = 1e-5;
/// Tolerance for the ReLU network, away from kinks.
pub const PIECEWISE_TOLERANCE: f64 = 1e-4;

/// A quadratic whose reported gradient is 1% too large in one coordinate.
struct SkewedGradient(QuadraticProblem);

impl Objective for SkewedGradient {
    fn num_samples(&self) -> usize {
        self.0.num_samples()
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, i: usize, x: &[f64]) -> f64 {
        self.0.value(i, x)
    }
}

impl Differentiable for SkewedGradient {
    fn gradient(&self, i: usize, x: &[f64]) -> ParamVector {
        let mut g = self.0.gradient(i, x);
        g[0] = g[0] * 1.01 + 0.01;
        g
    }
}

/// `count` probes `(i, base + scale·z)` with uniform `i` and Gaussian `z`.
pub fn random_probes(
    n: usize,
    base: &ParamVector,
    scale: f64,
    count: usize,
    rng: &mut RngStream,
) -> Vec<(usize, ParamVector)> {
    (0..count)
        .map(|_| {
            let i = rng.random_range(0..n);
            let x = base
                .iter()
                .map(|b| b + scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
                .collect();
            (i, x)
        })
        .collect()
}

fn gate(
    name: String,
    obj: &dyn Differentiable,
    probes: &[(usize, ParamVector)],
    tolerance: f64,
    seed: u64,
) -> CheckReport {
    let c = check_gradient(obj, probes, GRADIENT_STEP);
    CheckReport {
        name: format!("{name}[checked={},skipped={}]", c.probes_checked, c.probes_skipped),
        measured: c.max_relative_error,
        bound_or_target: tolerance,
        std_error: 0.0,
        pass: c.passes(tolerance),
        trials: probes.len(),
        seed,
    }
}

/// Central-difference gate for every built-in problem at `probes` random
/// points each. With `skewed` a quadratic with a wrong gradient is checked
/// instead.
pub fn check_gradient_self_check(probes: usize, seed: u64, skewed: bool) -> Result<Vec<CheckReport>> {
    let mut rng = RngStream::new(seed, Purpose::DataGeneration).child();
    let quad = QuadraticProblem::generate(10, 5, Spectrum::Uniform { lo: 0.1, hi: 5.0 }, seed)?;
    let zero10 = ParamVector::zeros(10);
    if skewed {
        let p = random_probes(5, &zero10, 1.0, probes, &mut rng);
        return Ok(vec![gate("gradient_gate_skewed".into(), &SkewedGradient(quad), &p, SMOOTH_TOLERANCE, seed)]);
    }
    let mut out = Vec::new();
    let p = random_probes(5, &zero10, 1.0, probes, &mut rng);
    out.push(gate("gradient_gate_quadratic".into(), &quad, &p, SMOOTH_TOLERANCE, seed));

    let ls = NonconvexLeastSquares::generate(50, 100, seed)?;
    let p = random_probes(50, &ls.initial_point(seed), 0.5, probes, &mut rng);
    out.push(gate("gradient_gate_nonconvex_ls".into(), &ls, &p, SMOOTH_TOLERANCE, seed));

    let digits = synth_digits(50, 8, 10, seed)?;
    let mlp = MlpClassifier::new(&digits, 10)?;
    let p = random_probes(50, &mlp.glorot_init(seed), 0.05, probes, &mut rng);
    out.push(gate("gradient_gate_mlp".into(), &mlp, &p, PIECEWISE_TOLERANCE, seed));
    Ok(out)
}
