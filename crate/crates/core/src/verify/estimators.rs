use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, VamoError};
use crate::ledger::QueryLedger;
use crate::minibatch::{Minibatch, SamplingMode};
use crate::objective::{Differentiable, Objective};
use crate::optim::fresh_zo_minibatch;
use crate::problems::{QuadraticProblem, Spectrum};
use crate::rng::{Purpose, RngStream};
use crate::vector::ParamVector;
use crate::zo::{
    build_checkpoint_cache, multi_point_estimate, sample_unit_sphere, smoothed_value_mc, two_point_estimate,
    zo_minibatch_at_checkpoint, CacheStrategy, DirectionSet, Smoothing,
};

use super::report::CheckReport;

/// Treats the whole average `f = (1/n) Σ f_i` as a single component.
pub(crate) struct Averaged<'a, O: ?Sized>(pub &'a O);

impl<O: Differentiable + ?Sized> Objective for Averaged<'_, O> {
    fn num_samples(&self) -> usize {
        1
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, _i: usize, x: &[f64]) -> f64 {
        self.0.full_value(x)
    }
}

impl<O: Differentiable + ?Sized> Differentiable for Averaged<'_, O> {
    fn gradient(&self, _i: usize, x: &[f64]) -> ParamVector {
        self.0.full_gradient(x)
    }
}

pub(crate) fn gaussian_point(d: usize, seed: u64) -> ParamVector {
    let mut rng = RngStream::new(seed, Purpose::DataGeneration).child();
    (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Which directions the minibatch checkpoint term uses in
/// [`check_zero_mean_correction`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrectionDirections {
    /// The cache's own per-sample directions (the implemented method).
    Cached,
    /// New directions per minibatch; the average no longer cancels.
    Fresh,
}

/// Averages `∇̂f_I(x̂) − ∇̂f(x̂)` over every ordered with-replacement
/// minibatch of size `b` and compares its norm to `‖∇̂f(x̂)‖`.
pub fn check_zero_mean_correction(
    n: usize,
    b: usize,
    d: usize,
    q: usize,
    mu: f64,
    seed: u64,
    directions: CorrectionDirections,
) -> Result<CheckReport> {
    if !(1..=8).contains(&n) || !(1..=3).contains(&b) {
        return Err(VamoError::invalid("exhaustive enumeration needs n <= 8 and b <= 3"));
    }
    let quad = QuadraticProblem::generate(d, n, Spectrum::Uniform { lo: 0.5, hi: 2.0 }, seed)?;
    let x_hat = gaussian_point(d, seed);
    let smoothing = Smoothing::new(mu)?;
    let ledger = QueryLedger::new();
    let mut rng = RngStream::new(seed, Purpose::DirectionSampling);
    let cache = build_checkpoint_cache(&quad, &x_hat, smoothing, q, CacheStrategy::CachedEstimates, &mut rng, &ledger)?;
    let full = cache.full_zo_grad();
    let batches = n.pow(b as u32);
    let mut avg = ParamVector::zeros(d);
    for code in 0..batches {
        let idx: Vec<usize> = (0..b).map(|k| code / n.pow(k as u32) % n).collect();
        let batch = Minibatch::from_indices(idx, n, SamplingMode::WithReplacement)?;
        let mb = match directions {
            CorrectionDirections::Cached => zo_minibatch_at_checkpoint(&cache, &batch, &quad, &ledger)?,
            CorrectionDirections::Fresh => fresh_zo_minibatch(&quad, &batch, &x_hat, smoothing, q, &mut rng, &ledger)?,
        };
        avg.add_assign(&mb.sub(full));
    }
    avg.div_count(batches);
    let measured = avg.norm() / full.norm();
    let bound = 1e-12;
    Ok(CheckReport {
        name: format!("zero_mean_correction[n={n},b={b},d={d},q={q}]"),
        measured,
        bound_or_target: bound,
        std_error: 0.0,
        pass: measured <= bound,
        trials: batches,
        seed,
    })
}

/// Bias of the smoothed function and of the two-point estimator mean.
///
/// Value: `|f̂_μ(x) − f(x)| ≤ Lμ²/2` up to three standard errors.
/// Gradient: `‖mean of estimates − ∇f(x)‖² ≤ μ²L²d²/4` plus the Monte Carlo
/// noise floor `tr(Σ̂)/M` and three of its standard deviations
/// (`√2 tr(Σ̂)/M`). The gradient part is exact only for objectives whose
/// smoothed gradient is computable; on quadratics `∇f_μ = ∇f`.
pub fn check_smoothing_bias(
    obj: &dyn Differentiable,
    smoothness: f64,
    x: &ParamVector,
    mu: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    let smoothing = Smoothing::new(mu)?;
    let f = Averaged(obj);
    let d = obj.dim();
    let mut rng = RngStream::new(seed, Purpose::DirectionSampling);

    let fx = obj.full_value(x);
    let mc = smoothed_value_mc(|p| obj.full_value(p), x, smoothing, trials, &mut rng)?;
    let value_measured = (mc.estimate - fx).abs();
    let value_bound = smoothness * mu * mu / 2.0;

    let grad = obj.full_gradient(x);
    let ledger = QueryLedger::new();
    let mut mean = ParamVector::zeros(d);
    let mut sq = ParamVector::zeros(d);
    for _ in 0..trials {
        let u = sample_unit_sphere(&mut rng, d)?;
        let g = two_point_estimate(&f, 0, x, smoothing, &u, &ledger)?;
        mean.add_assign(&g);
        for (s, v) in sq.iter_mut().zip(g.iter()) {
            *s += v * v;
        }
    }
    let m = trials as f64;
    mean.scale(1.0 / m);
    let trace_cov: f64 = sq.iter().zip(mean.iter()).map(|(s, mu_j)| s / m - mu_j * mu_j).sum::<f64>() * m / (m - 1.0);
    let noise = trace_cov / m;
    let grad_se = std::f64::consts::SQRT_2 * noise;
    let grad_measured = mean.dist_sq(&grad);
    let grad_bound = mu * mu * smoothness * smoothness * (d * d) as f64 / 4.0;

    Ok(vec![
        CheckReport {
            name: format!("smoothing_bias_value[d={d},mu={mu}]"),
            measured: value_measured,
            bound_or_target: value_bound,
            std_error: mc.std_error,
            pass: value_measured <= value_bound + 3.0 * mc.std_error,
            trials,
            seed,
        },
        CheckReport {
            name: format!("smoothing_bias_gradient[d={d},mu={mu}]"),
            measured: grad_measured,
            bound_or_target: grad_bound,
            std_error: grad_se,
            pass: grad_measured <= grad_bound + noise + 3.0 * grad_se,
            trials,
            seed,
        },
    ])
}

/// Error second moment `E‖∇̂f(x) − ∇f_μ(x)‖²` of the `q`-direction estimator.
///
/// For every `q` the measurement must stay below
/// `(2d/q)‖∇f‖² + μ²L²d²/(2q)`, with `d` replaced by `bound_dim` when given
/// (a deliberately wrong dimension makes a failing fixture). Every later `q`
/// must also satisfy `E(q) / E(q₀) ≤ 1.5 q₀/q`. Uses `∇f` for `∇f_μ`, which
/// is exact on quadratics.
#[allow(clippy::too_many_arguments)]
pub fn check_direction_variance_scaling(
    obj: &dyn Differentiable,
    smoothness: f64,
    x: &ParamVector,
    mu: f64,
    q_list: &[usize],
    trials: usize,
    seed: u64,
    bound_dim: Option<usize>,
) -> Result<Vec<CheckReport>> {
    if q_list.is_empty() || q_list[0] == 0 || q_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(VamoError::invalid("q list must be ascending and start at >= 1"));
    }
    if trials < 2 {
        return Err(VamoError::invalid("need at least two trials"));
    }
    let smoothing = Smoothing::new(mu)?;
    let f = Averaged(obj);
    let d = obj.dim();
    let grad = obj.full_gradient(x);
    let gsq = grad.norm_sq();
    let bd = bound_dim.unwrap_or(d) as f64;
    let ledger = QueryLedger::new();
    let mut rng = RngStream::new(seed, Purpose::DirectionSampling);
    let mut reports = Vec::new();
    let mut means = Vec::new();
    for &q in q_list {
        let (mut mean, mut m2) = (0.0, 0.0);
        for k in 1..=trials {
            let dirs = DirectionSet::from_seed(rng.next_u64(), q, d)?;
            let e = multi_point_estimate(&f, 0, x, smoothing, &dirs, &ledger)?.dist_sq(&grad);
            let delta = e - mean;
            mean += delta / k as f64;
            m2 += delta * (e - mean);
        }
        let se = (m2 / (trials - 1) as f64 / trials as f64).sqrt();
        let qf = q as f64;
        let bound = 2.0 * bd / qf * gsq + mu * mu * smoothness * smoothness * bd * bd / (2.0 * qf);
        reports.push(CheckReport {
            name: format!("direction_variance[d={d},q={q}]"),
            measured: mean,
            bound_or_target: bound,
            std_error: se,
            pass: mean <= bound,
            trials,
            seed,
        });
        means.push((q, mean, se));
    }
    let (q0, e0, se0) = means[0];
    for &(q, e, se) in &means[1..] {
        let ratio = if e0 > 0.0 { e / e0 } else { 0.0 };
        let target = 1.5 * q0 as f64 / q as f64;
        // Delta-method standard error of the ratio.
        let ratio_se = if e0 > 0.0 && e > 0.0 { ratio * ((se / e).powi(2) + (se0 / e0).powi(2)).sqrt() } else { 0.0 };
        reports.push(CheckReport {
            name: format!("direction_variance_ratio[q={q}/q={q0}]"),
            measured: ratio,
            bound_or_target: target,
            std_error: ratio_se,
            pass: ratio <= target,
            trials,
            seed,
        });
    }
    Ok(reports)
}

/// Distance of the mean of `trials` two-point estimates from `∇f(x)` on a
/// `d`-dimensional quadratic, against `5‖∇f(x)‖/√M`. `target_shift` moves
/// the comparison target by that multiple of the bound along the first
/// axis (a nonzero shift makes a failing fixture).
pub fn check_estimator_unbiasedness(d: usize, trials: usize, seed: u64, target_shift: f64) -> Result<CheckReport> {
    let quad = QuadraticProblem::generate(d, 1, Spectrum::Uniform { lo: 0.5, hi: 2.0 }, seed)?;
    let x = gaussian_point(d, seed);
    let smoothing = Smoothing::new(1e-3)?;
    let ledger = QueryLedger::new();
    let mut rng = RngStream::new(seed, Purpose::DirectionSampling);
    let mut mean = ParamVector::zeros(d);
    for _ in 0..trials {
        let u = sample_unit_sphere(&mut rng, d)?;
        mean.add_assign(&two_point_estimate(&quad, 0, &x, smoothing, &u, &ledger)?);
    }
    mean.scale(1.0 / trials as f64);
    let grad = quad.gradient(0, &x);
    let bound = 5.0 * grad.norm() / (trials as f64).sqrt();
    let mut target = grad;
    target[0] += target_shift * bound;
    let measured = mean.dist_sq(&target).sqrt();
    Ok(CheckReport {
        name: format!("estimator_unbiasedness[d={d}]"),
        measured,
        bound_or_target: bound,
        std_error: bound / 5.0,
        pass: measured <= bound,
        trials,
        seed,
    })
}
