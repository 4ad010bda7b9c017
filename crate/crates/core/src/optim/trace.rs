use std::time::Instant;

use rand::Rng;

use crate::error::{Result, VamoError};
use crate::ledger::QueryLedger;
use crate::objective::Objective;
use crate::rng::RngStream;
use crate::vector::ParamVector;

use super::config::{OutputMode, VamoConfig};

/// Iterates with a norm above this abort the run.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// One row of a run trace.
///
/// Row 0 describes the starting point (`epoch = 0`). Later rows are taken
/// after update `global_step`, which is step `inner_step` (1-based) of
/// epoch `epoch` (1-based).
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub epoch: usize,
    pub inner_step: usize,
    pub global_step: usize,
    /// Full objective `f(x)`.
    pub loss: f64,
    /// `‖∇f(x)‖²` when exact gradients exist, else `‖v‖²` of the last update.
    pub grad_norm_sq: f64,
    pub fwd_queries: u64,
    pub bwd_queries: u64,
    pub wall_ms: f64,
}

impl TraceRecord {
    pub fn total_queries(&self) -> u64 {
        self.fwd_queries + self.bwd_queries
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub final_point: ParamVector,
    pub output_point: ParamVector,
    /// `x_0, …, x_T` when the run kept them.
    pub iterates: Option<Vec<ParamVector>>,
    /// Global index of `output_point` under uniform output.
    pub output_index: Option<usize>,
}

impl RunTrace {
    /// A trace holding only the given iterates `x_0, …, x_T`.
    pub fn from_iterates(iterates: Vec<ParamVector>) -> Self {
        let last = iterates.last().cloned().unwrap_or_default();
        RunTrace {
            records: Vec::new(),
            final_point: last.clone(),
            output_point: last,
            iterates: Some(iterates),
            output_index: None,
        }
    }

    pub fn final_loss(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.loss)
    }
}

/// Chooses the reported point from a trace that kept its iterates.
///
/// Uniform mode draws from the pre-update iterates `x_0, …, x_{T−1}`; a
/// trace holding a single point returns it under either mode.
pub fn pick_output_iterate(trace: &RunTrace, mode: OutputMode, rng: &mut RngStream) -> Result<ParamVector> {
    let its = match &trace.iterates {
        Some(v) if !v.is_empty() => v,
        _ => return Err(VamoError::invalid("trace holds no iterates")),
    };
    match mode {
        OutputMode::LastIterate => Ok(its[its.len() - 1].clone()),
        OutputMode::UniformRandomIterate => {
            let pool = (its.len() - 1).max(1);
            Ok(its[rng.random_range(0..pool)].clone())
        }
    }
}

/// Bookkeeping shared by every optimizer loop.
pub(crate) struct Recorder<'a, O: Objective + ?Sized> {
    obj: &'a O,
    ledger: &'a QueryLedger,
    inner_steps: usize,
    total: usize,
    every: usize,
    start: Instant,
    trace: RunTrace,
    output_index: Option<usize>,
    output_point: Option<ParamVector>,
}

impl<'a, O: Objective + ?Sized> Recorder<'a, O> {
    pub(crate) fn new(obj: &'a O, cfg: &VamoConfig, ledger: &'a QueryLedger, output_index: Option<usize>) -> Self {
        Recorder {
            obj,
            ledger,
            inner_steps: cfg.inner_steps,
            total: cfg.total_steps(),
            every: cfg.record_every,
            start: Instant::now(),
            trace: RunTrace { iterates: cfg.keep_iterates.then(Vec::new), output_index, ..Default::default() },
            output_index,
            output_point: None,
        }
    }

    pub(crate) fn begin(&mut self, x0: &ParamVector) -> Result<()> {
        self.keep(0, x0);
        self.record(0, x0, None)
    }

    /// Called after update `t` (1-based) produced `x` from direction `v`.
    pub(crate) fn step(&mut self, t: usize, x: &ParamVector, v: &ParamVector) -> Result<()> {
        if !x.is_finite() || x.norm() > DIVERGENCE_NORM {
            return Err(self.diverged(t, x));
        }
        self.keep(t, x);
        if t.is_multiple_of(self.every) || t == self.total {
            self.record(t, x, Some(v))?;
        }
        Ok(())
    }

    pub(crate) fn finish(mut self, x: ParamVector) -> RunTrace {
        self.trace.output_point = self.output_point.take().unwrap_or_else(|| x.clone());
        self.trace.final_point = x;
        self.trace
    }

    fn keep(&mut self, t: usize, x: &ParamVector) {
        if let Some(its) = self.trace.iterates.as_mut() {
            its.push(x.clone());
        }
        if self.output_index == Some(t) {
            self.output_point = Some(x.clone());
        }
    }

    fn record(&mut self, t: usize, x: &ParamVector, v: Option<&ParamVector>) -> Result<()> {
        let loss = self.obj.full_value(x);
        if !loss.is_finite() {
            return Err(self.diverged(t, x));
        }
        let grad_norm_sq = match self.obj.as_differentiable() {
            Some(fo) => fo.full_gradient(x).norm_sq(),
            None => v.map_or(f64::NAN, |v| v.norm_sq()),
        };
        let (epoch, inner_step) =
            if t == 0 { (0, 0) } else { ((t - 1) / self.inner_steps + 1, (t - 1) % self.inner_steps + 1) };
        self.trace.records.push(TraceRecord {
            epoch,
            inner_step,
            global_step: t,
            loss,
            grad_norm_sq,
            fwd_queries: self.ledger.forward_passes(),
            bwd_queries: self.ledger.backward_passes(),
            wall_ms: self.start.elapsed().as_secs_f64() * 1e3,
        });
        Ok(())
    }

    fn diverged(&mut self, t: usize, x: &ParamVector) -> VamoError {
        let mut trace = std::mem::take(&mut self.trace);
        trace.final_point = x.clone();
        trace.output_point = x.clone();
        VamoError::Divergence { step: t, trace: Box::new(trace) }
    }
}
