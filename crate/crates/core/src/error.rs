use thiserror::Error;

use crate::data::DataError;
use crate::optim::RunTrace;

pub type Result<T, E = VamoError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum VamoError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A component function returned NaN or an infinity.
    #[error("sample {sample} evaluated to a non-finite value at a point of norm {:e}", norm(.point))]
    Evaluation { sample: usize, point: Vec<f64> },

    /// The iterate left the finite region (or its norm exceeded the guard).
    /// Carries every record produced before the abort.
    #[error("run diverged at global step {step}")]
    Divergence { step: usize, trace: Box<RunTrace> },

    #[error(transparent)]
    Data(#[from] DataError),
}

impl VamoError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        VamoError::InvalidArgument(msg.into())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}
