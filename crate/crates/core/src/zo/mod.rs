//! Zeroth-order gradient estimation.
//!
//! Two estimators built from function values only, for a component `f_i`
//! and unit directions `u_j ~ U(S^{d-1})`:
//!
//! ```text
//! two-point:   (d/μ)      [f_i(x + μu)   − f_i(x)] u
//! multi-point: (d/(μq)) Σ [f_i(x + μu_j) − f_i(x)] u_j
//! ```
//!
//! Both are unbiased for the gradient of the ball-smoothed function
//! `f_μ(x) = E_v[f(x + μv)]`, `v ~ U(B^d)`; for quadratics `∇f_μ = ∇f`.
//! [`smoothed_value_mc`] estimates `f_μ` directly for verification.
//!
//! [`CheckpointCache`] freezes one estimate per sample at an epoch
//! checkpoint so the variance-reduction correction is exactly zero-mean.

mod cache;
mod estimator;
mod smoothed;

pub use cache::{build_checkpoint_cache, zo_minibatch_at_checkpoint, CacheStrategy, CheckpointCache};
pub use estimator::{multi_point_estimate, sample_unit_sphere, two_point_estimate, DirectionSet, Smoothing, MU_FLOOR};
pub use smoothed::{sample_unit_ball, smoothed_value_mc, McEstimate};
