use crate::error::Result;
use crate::ledger::QueryLedger;
use crate::minibatch::sample_minibatch;
use crate::objective::{batch_gradient, Differentiable, Objective};
use crate::optim::{hybrid_blend, VamoConfig};
use crate::problems::QuadraticProblem;
use crate::rng::{Purpose, RngStream};
use crate::vector::ParamVector;
use crate::zo::{build_checkpoint_cache, zo_minibatch_at_checkpoint, CacheStrategy};

use super::report::CheckReport;

/// Constants entering the second-moment bound of the blended direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentBoundInputs {
    pub grad_norm_sq: f64,
    pub drift_sq: f64,
    pub smoothness: f64,
    pub sigma_sq: f64,
    pub dim: usize,
    pub batch_size: usize,
    pub mu: f64,
    pub alpha: f64,
    pub delta: f64,
}

/// Upper bound on `E‖v‖²` for `v = ∇f_I(x) − α(∇̂f_I(x̂) − ∇̂f(x̂))`:
///
/// ```text
/// 4(2α² − 2α + 1 + 24dδα²/b)‖∇f(x)‖²
///   + 12δ(4d+1)L²α²‖x̂ − x‖²/b
///   + 9δd²L²μ²α²/b
///   + 4σ²(24dδα² + (1−α)²)/b
/// ```
pub fn blend_moment_bound(p: &MomentBoundInputs) -> f64 {
    let d = p.dim as f64;
    let b = p.batch_size as f64;
    let (a, l, del) = (p.alpha, p.smoothness, p.delta);
    4.0 * (2.0 * a * a - 2.0 * a + 1.0 + 24.0 * d * del * a * a / b) * p.grad_norm_sq
        + 12.0 * del * (4.0 * d + 1.0) * l * l * a * a * p.drift_sq / b
        + 9.0 * del * d * d * l * l * p.mu * p.mu * a * a / b
        + 4.0 * p.sigma_sq * (24.0 * d * del * a * a + (1.0 - a).powi(2)) / b
}

/// Monte Carlo `E‖v‖²` at fixed `(x, x̂)` over fresh checkpoint directions
/// and minibatches, compared with [`blend_moment_bound`] as a hard ceiling.
///
/// `σ²` is the exact gradient variance, taken as the larger of its values at
/// `x` and `x̂`. `bound_scale` multiplies the bound (values below 1 make a
/// failing fixture).
pub fn check_blend_second_moment(
    quad: &QuadraticProblem,
    x: &ParamVector,
    x_hat: &ParamVector,
    cfg: &VamoConfig,
    trials: usize,
    seed: u64,
    bound_scale: f64,
) -> Result<CheckReport> {
    let n = quad.num_samples();
    cfg.validate(n)?;
    let smoothing = cfg.smoothing()?;
    let ledger = QueryLedger::new();
    let mut dir_rng = RngStream::new(seed, Purpose::DirectionSampling);
    let mut mb_rng = RngStream::new(seed, Purpose::MinibatchSampling);
    let (mut mean, mut m2) = (0.0, 0.0);
    for k in 1..=trials {
        let cache = build_checkpoint_cache(
            quad,
            x_hat,
            smoothing,
            cfg.q,
            CacheStrategy::CachedEstimates,
            &mut dir_rng,
            &ledger,
        )?;
        let batch = sample_minibatch(n, cfg.batch_size, cfg.sampling, &mut mb_rng)?;
        let fo = batch_gradient(quad, &batch, x, &ledger);
        let mb = zo_minibatch_at_checkpoint(&cache, &batch, quad, &ledger)?;
        let v = hybrid_blend(&fo, &mb, cache.full_zo_grad(), cfg.alpha)?.norm_sq();
        let delta = v - mean;
        mean += delta / k as f64;
        m2 += delta * (v - mean);
    }
    let se = (m2 / (trials.max(2) - 1) as f64 / trials as f64).sqrt();
    let inputs = MomentBoundInputs {
        grad_norm_sq: quad.full_gradient(x).norm_sq(),
        drift_sq: x.dist_sq(x_hat),
        smoothness: quad.smoothness().expect("quadratics know L"),
        sigma_sq: quad.sigma_sq_at(x).max(quad.sigma_sq_at(x_hat)),
        dim: quad.dim(),
        batch_size: cfg.batch_size,
        mu: cfg.mu,
        alpha: cfg.alpha,
        delta: cfg.sampling.delta(cfg.batch_size, n),
    };
    let bound = bound_scale * blend_moment_bound(&inputs);
    Ok(CheckReport {
        name: format!(
            "blend_second_moment[d={},n={n},b={},alpha={:.4},{:?}]",
            quad.dim(),
            cfg.batch_size,
            cfg.alpha,
            cfg.sampling
        ),
        measured: mean,
        bound_or_target: bound,
        std_error: se,
        pass: mean <= bound,
        trials,
        seed,
    })
}
