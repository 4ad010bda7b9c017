use crate::error::Result;
use crate::ledger::QueryLedger;
use crate::minibatch::{sample_minibatch, Minibatch};
use crate::objective::{batch_gradient, Differentiable, Objective};
use crate::vector::ParamVector;
use crate::zo::{build_checkpoint_cache, zo_minibatch_at_checkpoint};

use super::blend::hybrid_blend;
use super::config::VamoConfig;
use super::trace::{Recorder, RunTrace};
use super::vamo::{fresh_zo_minibatch, prepare};

/// Minibatch SGD with exact gradients: `x ← x − η ∇f_I(x)`.
pub fn fo_sgd_run<O: Differentiable + ?Sized>(
    obj: &O,
    cfg: &VamoConfig,
    x0: &ParamVector,
    ledger: &QueryLedger,
) -> Result<RunTrace> {
    let mut streams = prepare(obj, cfg, x0)?;
    let n = obj.num_samples();
    let mut rec = Recorder::new(obj, cfg, ledger, streams.output_index);
    let mut x = x0.clone();
    rec.begin(&x)?;
    for t in 0..cfg.total_steps() {
        let batch = sample_minibatch(n, cfg.batch_size, cfg.sampling, &mut streams.minibatches)?;
        let g = batch_gradient(obj, &batch, &x, ledger);
        x.axpy(-cfg.step.at(t), &g);
        rec.step(t + 1, &x, &g)?;
    }
    Ok(rec.finish(x))
}

/// SVRG: `∇f_I(x) − ∇f_I(x̂) + ∇f(x̂)` with an exact full gradient per epoch.
pub fn fo_svrg_run<O: Differentiable + ?Sized>(
    obj: &O,
    cfg: &VamoConfig,
    x0: &ParamVector,
    ledger: &QueryLedger,
) -> Result<RunTrace> {
    let mut streams = prepare(obj, cfg, x0)?;
    let n = obj.num_samples();
    let mut rec = Recorder::new(obj, cfg, ledger, streams.output_index);
    let mut x = x0.clone();
    rec.begin(&x)?;
    let mut t = 0;
    for _ in 0..cfg.epochs {
        let full = batch_gradient(obj, &Minibatch::full(n), &x, ledger);
        let x_hat = x.clone();
        for _ in 0..cfg.inner_steps {
            let batch = sample_minibatch(n, cfg.batch_size, cfg.sampling, &mut streams.minibatches)?;
            let g = batch_gradient(obj, &batch, &x, ledger);
            let g_hat = batch_gradient(obj, &batch, &x_hat, ledger);
            let v = hybrid_blend(&g, &g_hat, &full, 1.0)?;
            x.axpy(-cfg.step.at(t), &v);
            t += 1;
            rec.step(t, &x, &v)?;
        }
    }
    Ok(rec.finish(x))
}

/// Minibatch SGD on ZO estimates with new directions every step.
pub fn zo_sgd_run<O: Objective + ?Sized>(
    obj: &O,
    cfg: &VamoConfig,
    x0: &ParamVector,
    ledger: &QueryLedger,
) -> Result<RunTrace> {
    let mut streams = prepare(obj, cfg, x0)?;
    let smoothing = cfg.smoothing()?;
    let n = obj.num_samples();
    let mut rec = Recorder::new(obj, cfg, ledger, streams.output_index);
    let mut x = x0.clone();
    rec.begin(&x)?;
    for t in 0..cfg.total_steps() {
        let batch = sample_minibatch(n, cfg.batch_size, cfg.sampling, &mut streams.minibatches)?;
        let g = fresh_zo_minibatch(obj, &batch, &x, smoothing, cfg.q, &mut streams.directions, ledger)?;
        x.axpy(-cfg.step.at(t), &g);
        rec.step(t + 1, &x, &g)?;
    }
    Ok(rec.finish(x))
}

/// SVRG with every gradient replaced by a ZO estimate.
///
/// The current-point term draws new directions each step; the checkpoint
/// minibatch term reuses the directions of the checkpoint cache.
pub fn zo_svrg_run<O: Objective + ?Sized>(
    obj: &O,
    cfg: &VamoConfig,
    x0: &ParamVector,
    ledger: &QueryLedger,
) -> Result<RunTrace> {
    let mut streams = prepare(obj, cfg, x0)?;
    let smoothing = cfg.smoothing()?;
    let n = obj.num_samples();
    let mut rec = Recorder::new(obj, cfg, ledger, streams.output_index);
    let mut x = x0.clone();
    rec.begin(&x)?;
    let mut t = 0;
    for _ in 0..cfg.epochs {
        let cache =
            build_checkpoint_cache(obj, &x, smoothing, cfg.q, cfg.cache_strategy, &mut streams.directions, ledger)?;
        for _ in 0..cfg.inner_steps {
            let batch = sample_minibatch(n, cfg.batch_size, cfg.sampling, &mut streams.minibatches)?;
            let g = fresh_zo_minibatch(obj, &batch, &x, smoothing, cfg.q, &mut streams.directions, ledger)?;
            let g_hat = zo_minibatch_at_checkpoint(&cache, &batch, obj, ledger)?;
            let v = hybrid_blend(&g, &g_hat, cache.full_zo_grad(), 1.0)?;
            x.axpy(-cfg.step.at(t), &v);
            t += 1;
            rec.step(t, &x, &v)?;
        }
    }
    Ok(rec.finish(x))
}
