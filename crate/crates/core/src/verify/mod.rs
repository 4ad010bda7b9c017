//! Executable checks of the estimator and variance-reduction claims.
//!
//! Each named check in [`CHECKS`] runs with fixed sizes and a caller-chosen
//! seed and returns one or more [`CheckReport`]s. Bounds pass on `≤`, never
//! on "close to". Every check has a `_forced_failure` twin that perturbs one
//! ingredient (a wrong constant, a wrong target, fresh directions) and must
//! fail; `run_all` skips the twins.

mod accounting;
mod estimators;
mod gradients;
mod moment;
mod report;

pub use accounting::{
    check_overhead_formula, check_query_closed_forms, check_sgd_reduction, closed_form_cases, OverheadTarget,
};
pub use estimators::{
    check_direction_variance_scaling, check_estimator_unbiasedness, check_smoothing_bias, check_zero_mean_correction,
    CorrectionDirections,
};
pub use gradients::{check_gradient_self_check, random_probes, GRADIENT_STEP, PIECEWISE_TOLERANCE, SMOOTH_TOLERANCE};
pub use moment::{blend_moment_bound, check_blend_second_moment, MomentBoundInputs};
pub use report::{read_reports_csv, write_reports_csv, CheckReport, REPORT_COLUMNS};

use crate::error::Result;
use crate::minibatch::SamplingMode;
use crate::objective::Objective;
use crate::optim::VamoConfig;
use crate::problems::{QuadraticProblem, Spectrum};

use estimators::gaussian_point;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 7;

type CheckFn = fn(u64) -> Result<Vec<CheckReport>>;

/// A named, parameter-free check.
pub struct NamedCheck {
    pub name: &'static str,
    pub forced_failure: bool,
    pub run: CheckFn,
}

pub const CHECKS: &[NamedCheck] = &[
    NamedCheck {
        name: "zero_mean_correction",
        forced_failure: false,
        run: |s| zero_mean(s, CorrectionDirections::Cached),
    },
    NamedCheck {
        name: "zero_mean_correction_forced_failure",
        forced_failure: true,
        run: |s| zero_mean(s, CorrectionDirections::Fresh),
    },
    NamedCheck { name: "smoothing_bias", forced_failure: false, run: |s| smoothing_bias(s, 1.0) },
    NamedCheck { name: "smoothing_bias_forced_failure", forced_failure: true, run: |s| smoothing_bias(s, 0.1) },
    NamedCheck { name: "direction_variance_scaling", forced_failure: false, run: |s| variance_scaling(s, None) },
    NamedCheck {
        name: "direction_variance_scaling_forced_failure",
        forced_failure: true,
        run: |s| variance_scaling(s, Some(1)),
    },
    NamedCheck { name: "blend_second_moment", forced_failure: false, run: |s| second_moment(s, 1.0) },
    NamedCheck { name: "blend_second_moment_forced_failure", forced_failure: true, run: |s| second_moment(s, 0.1) },
    NamedCheck { name: "overhead_formula", forced_failure: false, run: |s| overhead(s, OverheadTarget::SamplePasses) },
    NamedCheck {
        name: "overhead_formula_forced_failure",
        forced_failure: true,
        run: |s| overhead(s, OverheadTarget::DimensionScaled),
    },
    NamedCheck {
        name: "estimator_unbiasedness",
        forced_failure: false,
        run: |s| Ok(vec![check_estimator_unbiasedness(10, 200_000, s, 0.0)?]),
    },
    NamedCheck {
        name: "estimator_unbiasedness_forced_failure",
        forced_failure: true,
        run: |s| Ok(vec![check_estimator_unbiasedness(10, 200_000, s, 2.0)?]),
    },
    NamedCheck {
        name: "sgd_reduction",
        forced_failure: false,
        run: |s| Ok(vec![check_sgd_reduction(10, 20, 0.0, s)?]),
    },
    NamedCheck {
        name: "sgd_reduction_forced_failure",
        forced_failure: true,
        run: |s| Ok(vec![check_sgd_reduction(10, 20, 1e-3, s)?]),
    },
    NamedCheck { name: "query_closed_forms", forced_failure: false, run: |s| check_query_closed_forms(s, false) },
    NamedCheck {
        name: "query_closed_forms_forced_failure",
        forced_failure: true,
        run: |s| check_query_closed_forms(s, true),
    },
    NamedCheck { name: "gradient_self_check", forced_failure: false, run: |s| check_gradient_self_check(20, s, false) },
    NamedCheck {
        name: "gradient_self_check_forced_failure",
        forced_failure: true,
        run: |s| check_gradient_self_check(20, s, true),
    },
];

/// Looks a check up by name; a leading `check_` is ignored.
pub fn find_check(name: &str) -> Option<&'static NamedCheck> {
    let name = name.strip_prefix("check_").unwrap_or(name);
    CHECKS.iter().find(|c| c.name == name)
}

/// Runs every check that is not a forced-failure fixture.
pub fn run_all(seed: u64) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for c in CHECKS.iter().filter(|c| !c.forced_failure) {
        out.extend((c.run)(seed)?);
    }
    Ok(out)
}

fn zero_mean(seed: u64, dirs: CorrectionDirections) -> Result<Vec<CheckReport>> {
    [1, 3].iter().map(|&q| check_zero_mean_correction(6, 2, 5, q, 1e-3, seed, dirs)).collect()
}

fn smoothing_bias(seed: u64, l_factor: f64) -> Result<Vec<CheckReport>> {
    let quad = QuadraticProblem::generate(10, 1, Spectrum::Identity, seed)?;
    let x = gaussian_point(10, seed);
    let l = quad.smoothness().expect("quadratics know L") * l_factor;
    check_smoothing_bias(&quad, l, &x, 0.1, 100_000, seed)
}

fn variance_scaling(seed: u64, bound_dim: Option<usize>) -> Result<Vec<CheckReport>> {
    let quad = QuadraticProblem::generate(50, 1, Spectrum::Uniform { lo: 0.5, hi: 2.0 }, seed)?;
    let x = gaussian_point(50, seed);
    let l = quad.smoothness().expect("quadratics know L");
    check_direction_variance_scaling(&quad, l, &x, 1e-3, &[1, 5, 25], 10_000, seed, bound_dim)
}

fn second_moment(seed: u64, scale: f64) -> Result<Vec<CheckReport>> {
    let (d, n) = (20, 50);
    let quad = QuadraticProblem::generate(d, n, Spectrum::Uniform { lo: 0.5, hi: 2.0 }, seed)?;
    let x = gaussian_point(d, seed);
    let x_hat = gaussian_point(d, seed.wrapping_add(1));
    let mut out = Vec::new();
    for sampling in [SamplingMode::WithReplacement, SamplingMode::WithoutReplacement] {
        for alpha in [0.0, 1.0 / d as f64, 0.5] {
            let cfg = VamoConfig { batch_size: 5, mu: 1e-3, alpha, q: 1, sampling, ..Default::default() };
            out.push(check_blend_second_moment(&quad, &x, &x_hat, &cfg, 10_000, seed, scale)?);
        }
    }
    Ok(out)
}

fn overhead(seed: u64, target: OverheadTarget) -> Result<Vec<CheckReport>> {
    check_overhead_formula(256, 32, 10, 1, 1.2e8, seed, target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_paired() {
        for c in CHECKS {
            assert_eq!(CHECKS.iter().filter(|o| o.name == c.name).count(), 1);
            if !c.forced_failure {
                assert!(find_check(&format!("{}_forced_failure", c.name)).is_some(), "{}", c.name);
            }
        }
        assert_eq!(find_check("check_zero_mean_correction").unwrap().name, "zero_mean_correction");
        assert!(find_check("nope").is_none());
    }
}
