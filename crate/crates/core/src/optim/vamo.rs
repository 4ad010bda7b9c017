use rand::{Rng, RngCore};

use crate::error::{Result, VamoError};
use crate::ledger::QueryLedger;
use crate::minibatch::{sample_minibatch, Minibatch};
use crate::objective::{batch_gradient, Differentiable, Objective};
use crate::rng::{Purpose, RngStream};
use crate::vector::ParamVector;
use crate::zo::{
    build_checkpoint_cache, multi_point_estimate, zo_minibatch_at_checkpoint, CheckpointCache, DirectionSet, Smoothing,
};

use super::blend::hybrid_blend;
use super::config::{CheckpointDirections, CheckpointEstimator, OutputMode, VamoConfig};
use super::trace::{Recorder, RunTrace};

/// The random streams a run draws from, all derived from its master seed.
pub(crate) struct RunStreams {
    pub directions: RngStream,
    pub minibatches: RngStream,
    pub output_index: Option<usize>,
}

pub(crate) fn prepare<O: Objective + ?Sized>(obj: &O, cfg: &VamoConfig, x0: &ParamVector) -> Result<RunStreams> {
    cfg.validate(obj.num_samples())?;
    x0.check_dim(obj.dim())?;
    if !x0.is_finite() {
        return Err(VamoError::invalid("starting point has non-finite entries"));
    }
    let output_index = match cfg.output_mode {
        OutputMode::LastIterate => None,
        OutputMode::UniformRandomIterate => {
            let mut rng = RngStream::new(cfg.master_seed, Purpose::OutputSelection);
            Some(rng.random_range(0..cfg.total_steps()))
        }
    };
    Ok(RunStreams {
        directions: RngStream::new(cfg.master_seed, Purpose::DirectionSampling),
        minibatches: RngStream::new(cfg.master_seed, Purpose::MinibatchSampling),
        output_index,
    })
}

/// Minibatch ZO estimate at `x` with newly drawn directions for every
/// element. Seeds are drawn in ascending index order.
pub(crate) fn fresh_zo_minibatch<O: Objective + ?Sized>(
    obj: &O,
    batch: &Minibatch,
    x: &ParamVector,
    smoothing: Smoothing,
    q: usize,
    rng: &mut RngStream,
    ledger: &QueryLedger,
) -> Result<ParamVector> {
    let mut acc = ParamVector::zeros(x.dim());
    for i in batch.sorted() {
        let dirs = DirectionSet::from_seed(rng.next_u64(), q, x.dim())?;
        acc.add_assign(&multi_point_estimate(obj, i, x, smoothing, &dirs, ledger)?);
    }
    acc.div_count(batch.len());
    Ok(acc)
}

enum Checkpoint {
    Zo(CheckpointCache),
    Fo { x_hat: ParamVector, full: ParamVector },
}

impl Checkpoint {
    fn full(&self) -> &ParamVector {
        match self {
            Checkpoint::Zo(c) => c.full_zo_grad(),
            Checkpoint::Fo { full, .. } => full,
        }
    }
}

/// Runs the hybrid variance-reduced method.
///
/// Each epoch freezes a checkpoint `x̂` (the last iterate of the previous
/// epoch) and builds `ĝ`, an average of one ZO estimate per sample. Each
/// inner step then draws a minibatch `I` and moves along
/// `∇f_I(x) − α (∇̂f_I(x̂) − ĝ)`.
pub fn vamo_run<O: Differentiable + ?Sized>(
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
        let ckpt = match cfg.checkpoint_estimator {
            CheckpointEstimator::ZerothOrder => Checkpoint::Zo(build_checkpoint_cache(
                obj,
                &x,
                smoothing,
                cfg.q,
                cfg.cache_strategy,
                &mut streams.directions,
                ledger,
            )?),
            CheckpointEstimator::FirstOrder => {
                Checkpoint::Fo { full: batch_gradient(obj, &Minibatch::full(n), &x, ledger), x_hat: x.clone() }
            }
        };
        for _ in 0..cfg.inner_steps {
            let batch = sample_minibatch(n, cfg.batch_size, cfg.sampling, &mut streams.minibatches)?;
            let fo = batch_gradient(obj, &batch, &x, ledger);
            let mb = match (&ckpt, cfg.checkpoint_directions) {
                (Checkpoint::Zo(cache), CheckpointDirections::Reuse) => {
                    zo_minibatch_at_checkpoint(cache, &batch, obj, ledger)?
                }
                (Checkpoint::Zo(cache), CheckpointDirections::Fresh) => {
                    fresh_zo_minibatch(obj, &batch, cache.x_hat(), smoothing, cfg.q, &mut streams.directions, ledger)?
                }
                (Checkpoint::Fo { x_hat, .. }, _) => batch_gradient(obj, &batch, x_hat, ledger),
            };
            let v = hybrid_blend(&fo, &mb, ckpt.full(), cfg.alpha)?;
            x.axpy(-cfg.step.at(t), &v);
            t += 1;
            rec.step(t, &x, &v)?;
        }
    }
    Ok(rec.finish(x))
}
