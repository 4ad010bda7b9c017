use crate::error::{Result, VamoError};
use crate::ledger::QueryLedger;
use crate::objective::Objective;
use crate::vector::ParamVector;
use crate::zo::CacheStrategy;

use super::baselines::{fo_sgd_run, fo_svrg_run, zo_sgd_run, zo_svrg_run};
use super::config::{CheckpointDirections, CheckpointEstimator, VamoConfig};
use super::trace::RunTrace;
use super::vamo::vamo_run;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Vamo,
    FoSgd,
    FoSvrg,
    ZoSgd,
    ZoSvrg,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Vamo, Method::FoSgd, Method::FoSvrg, Method::ZoSgd, Method::ZoSvrg];

    pub fn name(self) -> &'static str {
        match self {
            Method::Vamo => "vamo",
            Method::FoSgd => "fo_sgd",
            Method::FoSvrg => "fo_svrg",
            Method::ZoSgd => "zo_sgd",
            Method::ZoSvrg => "zo_svrg",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn needs_gradients(self) -> bool {
        matches!(self, Method::Vamo | Method::FoSgd | Method::FoSvrg)
    }
}

/// Runs `method` on a type-erased objective.
pub fn run_method(
    method: Method,
    obj: &dyn Objective,
    cfg: &VamoConfig,
    x0: &ParamVector,
    ledger: &QueryLedger,
) -> Result<RunTrace> {
    let fo = || {
        obj.as_differentiable().ok_or_else(|| VamoError::invalid(format!("{} needs exact gradients", method.name())))
    };
    match method {
        Method::Vamo => vamo_run(fo()?, cfg, x0, ledger),
        Method::FoSgd => fo_sgd_run(fo()?, cfg, x0, ledger),
        Method::FoSvrg => fo_svrg_run(fo()?, cfg, x0, ledger),
        Method::ZoSgd => zo_sgd_run(obj, cfg, x0, ledger),
        Method::ZoSvrg => zo_svrg_run(obj, cfg, x0, ledger),
    }
}

/// Forward and backward passes a complete run of `method` makes on a
/// problem with `n` samples. Monitoring is not charged.
pub fn predicted_queries(method: Method, cfg: &VamoConfig, n: usize) -> (u64, u64) {
    let s = cfg.epochs as u64;
    let t = cfg.total_steps() as u64;
    let b = cfg.batch_size as u64;
    let n = n as u64;
    let zo = cfg.q as u64 + 1;
    let replay = cfg.cache_strategy == CacheStrategy::SeedReplay;
    match method {
        Method::FoSgd => (t * b, t * b),
        Method::FoSvrg => (s * n + 2 * t * b, s * n + 2 * t * b),
        Method::ZoSgd => (t * b * zo, 0),
        Method::ZoSvrg => {
            let ckpt_term = if replay { t * b * zo } else { 0 };
            (s * n * zo + t * b * zo + ckpt_term, 0)
        }
        Method::Vamo => match cfg.checkpoint_estimator {
            CheckpointEstimator::FirstOrder => (s * n + 2 * t * b, s * n + 2 * t * b),
            CheckpointEstimator::ZerothOrder => {
                let ckpt_term = match cfg.checkpoint_directions {
                    CheckpointDirections::Fresh => t * b * zo,
                    CheckpointDirections::Reuse if replay => t * b * zo,
                    CheckpointDirections::Reuse => 0,
                };
                (s * n * zo + t * b + ckpt_term, t * b)
            }
        },
    }
}

/// Extra queries of the cached hybrid method over SGD, relative to SGD,
/// at sample-pass granularity: `n(q+1) / (2bm)`.
pub fn overhead_ratio(n: usize, batch_size: usize, inner_steps: usize, q: usize) -> Result<f64> {
    if n == 0 || batch_size == 0 || inner_steps == 0 || q == 0 {
        return Err(VamoError::invalid("overhead needs n, b, m, q >= 1"));
    }
    Ok((n * (q + 1)) as f64 / (2 * batch_size * inner_steps) as f64)
}

/// The same overhead when a checkpoint estimate is counted as one query per
/// sample and an exact gradient as `d`: `n / (2bdm)`.
pub fn dimension_scaled_overhead(n: usize, batch_size: usize, dim: f64, inner_steps: usize) -> f64 {
    n as f64 / (2.0 * batch_size as f64 * dim * inner_steps as f64)
}
