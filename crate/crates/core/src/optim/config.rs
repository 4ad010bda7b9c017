use crate::error::{Result, VamoError};
use crate::minibatch::SamplingMode;
use crate::zo::{CacheStrategy, Smoothing};

/// Step size as a function of the global step index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
}

impl StepSchedule {
    pub fn at(&self, _step: usize) -> f64 {
        match *self {
            StepSchedule::Constant(eta) => eta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputMode {
    #[default]
    LastIterate,
    /// Uniform over the pre-update inner iterates of every epoch.
    UniformRandomIterate,
}

/// Which directions the inner-loop checkpoint term `∇̂f_I(x̂)` uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CheckpointDirections {
    /// The per-sample directions drawn when the cache was built.
    #[default]
    Reuse,
    /// New directions every inner step. Unbiased only in full expectation.
    Fresh,
}

/// How the checkpoint terms are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CheckpointEstimator {
    #[default]
    ZerothOrder,
    /// Exact gradients at the checkpoint. With `alpha = 1` this is SVRG.
    FirstOrder,
}

/// Settings shared by the optimizer and the baselines.
///
/// `epochs × inner_steps` is the number of parameter updates `T` for every
/// method; the SGD baselines simply ignore the epoch structure apart from
/// record labels.
#[derive(Clone, Debug, PartialEq)]
pub struct VamoConfig {
    pub epochs: usize,
    pub inner_steps: usize,
    pub step: StepSchedule,
    pub batch_size: usize,
    pub mu: f64,
    pub alpha: f64,
    pub q: usize,
    pub sampling: SamplingMode,
    pub cache_strategy: CacheStrategy,
    pub checkpoint_directions: CheckpointDirections,
    pub checkpoint_estimator: CheckpointEstimator,
    pub output_mode: OutputMode,
    pub master_seed: u64,
    /// Record every this many updates (and always after the last one).
    pub record_every: usize,
    /// Keep every iterate `x_0, …, x_T` in the trace.
    pub keep_iterates: bool,
}

impl Default for VamoConfig {
    fn default() -> Self {
        VamoConfig {
            epochs: 1,
            inner_steps: 10,
            step: StepSchedule::Constant(0.01),
            batch_size: 1,
            mu: 1e-3,
            alpha: 0.0,
            q: 1,
            sampling: SamplingMode::WithReplacement,
            cache_strategy: CacheStrategy::CachedEstimates,
            checkpoint_directions: CheckpointDirections::Reuse,
            checkpoint_estimator: CheckpointEstimator::ZerothOrder,
            output_mode: OutputMode::LastIterate,
            master_seed: 0,
            record_every: 1,
            keep_iterates: false,
        }
    }
}

impl VamoConfig {
    pub fn with_step(mut self, eta: f64) -> Self {
        self.step = StepSchedule::Constant(eta);
        self
    }

    pub fn total_steps(&self) -> usize {
        self.epochs * self.inner_steps
    }

    pub fn smoothing(&self) -> Result<Smoothing> {
        Smoothing::new(self.mu)
    }

    /// Checks the configuration against a problem with `n` samples.
    pub fn validate(&self, n: usize) -> Result<()> {
        let positive = [
            ("epochs", self.epochs),
            ("inner_steps", self.inner_steps),
            ("batch_size", self.batch_size),
            ("q", self.q),
            ("record_every", self.record_every),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(VamoError::invalid(format!("{name} must be at least 1")));
            }
        }
        let StepSchedule::Constant(eta) = self.step;
        if !(eta.is_finite() && eta > 0.0) {
            return Err(VamoError::invalid(format!("step size must be positive, got {eta}")));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(VamoError::invalid(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        self.smoothing()?;
        if n == 0 {
            return Err(VamoError::invalid("objective has no samples"));
        }
        if self.sampling == SamplingMode::WithoutReplacement && self.batch_size > n {
            return Err(VamoError::invalid(format!(
                "batch size {} exceeds {n} samples without replacement",
                self.batch_size
            )));
        }
        Ok(())
    }
}
