//! The hybrid optimizer, its baselines, and the query model.
//!
//! Every method shares [`VamoConfig`] and the same random streams: minibatch
//! indices come from the minibatch stream and directions from the direction
//! stream of `master_seed`. Two methods that differ only in how they form
//! their update therefore see identical minibatch sequences.

mod baselines;
mod blend;
mod config;
mod params;
mod queries;
mod trace;
mod vamo;

pub use baselines::{fo_sgd_run, fo_svrg_run, zo_sgd_run, zo_svrg_run};
pub use blend::hybrid_blend;
pub use config::{CheckpointDirections, CheckpointEstimator, OutputMode, StepSchedule, VamoConfig};
pub use params::{multi_point_params, two_point_params, Prescription};
pub use queries::{dimension_scaled_overhead, overhead_ratio, predicted_queries, run_method, Method};
pub use trace::{pick_output_iterate, RunTrace, TraceRecord, DIVERGENCE_NORM};
pub use vamo::vamo_run;

pub(crate) use vamo::fresh_zo_minibatch;
