use rand::Rng;

use crate::error::{Result, VamoError};
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum SamplingMode {
    /// i.i.d. uniform indices.
    #[default]
    WithReplacement,
    /// A uniform random subset of size `b`.
    WithoutReplacement,
}

impl SamplingMode {
    /// The indicator that separates the two sampling schemes in the
    /// second-moment bound of the blended estimator: always 1 with
    /// replacement, and 1 iff `b < n` without.
    pub fn delta(self, batch: usize, samples: usize) -> f64 {
        match self {
            SamplingMode::WithReplacement => 1.0,
            SamplingMode::WithoutReplacement => {
                if batch < samples {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Sample indices into `[0, n)`.
///
/// `indices` keeps draw order; reductions over a batch go through
/// [`Minibatch::sorted`] so that they accumulate in ascending index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Minibatch {
    indices: Vec<usize>,
    mode: SamplingMode,
}

impl Minibatch {
    /// Builds a batch from explicit indices (used by exhaustive enumeration).
    pub fn from_indices(indices: Vec<usize>, n: usize, mode: SamplingMode) -> Result<Self> {
        if indices.is_empty() {
            return Err(VamoError::invalid("minibatch must contain at least one index"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(VamoError::invalid(format!("minibatch index {bad} out of range for {n} samples")));
        }
        if mode == SamplingMode::WithoutReplacement {
            let mut s = indices.clone();
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(VamoError::invalid("repeated index in a without-replacement minibatch"));
            }
        }
        Ok(Minibatch { indices, mode })
    }

    /// Every index in `[0, n)`, in order.
    pub fn full(n: usize) -> Self {
        Minibatch { indices: (0..n).collect(), mode: SamplingMode::WithoutReplacement }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    pub fn sorted(&self) -> Vec<usize> {
        let mut s = self.indices.clone();
        s.sort_unstable();
        s
    }
}

pub fn sample_minibatch(n: usize, b: usize, mode: SamplingMode, rng: &mut RngStream) -> Result<Minibatch> {
    if n == 0 {
        return Err(VamoError::invalid("cannot sample from zero samples"));
    }
    if b == 0 {
        return Err(VamoError::invalid("batch size must be at least 1"));
    }
    let indices = match mode {
        SamplingMode::WithReplacement => (0..b).map(|_| rng.random_range(0..n)).collect(),
        SamplingMode::WithoutReplacement => {
            if b > n {
                return Err(VamoError::invalid(format!("batch size {b} exceeds {n} samples without replacement")));
            }
            rand::seq::index::sample(rng, n, b).into_vec()
        }
    };
    Ok(Minibatch { indices, mode })
}
