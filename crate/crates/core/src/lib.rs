//! Hybrid first-order / zeroth-order variance-reduced optimization.
//!
//! `vamo` minimizes finite sums `f(x) = (1/n) Σ f_i(x)` with an SVRG-style
//! loop whose control variate is built from function values only. Each
//! epoch estimates the full gradient at a checkpoint `x̂` by finite
//! differences along random directions; each inner step then uses
//!
//! ```text
//! v = ∇f_I(x) − α (∇̂f_I(x̂) − ∇̂f(x̂))
//! ```
//!
//! where `∇f_I` is an exact minibatch gradient and the hatted terms are the
//! checkpoint estimates. The correction has mean exactly zero over
//! minibatches, so `v` stays unbiased while its variance shrinks.
//!
//! ```
//! use vamo::{optim, problems::{QuadraticProblem, Spectrum}, QueryLedger};
//!
//! let problem = QuadraticProblem::generate(5, 8, Spectrum::Uniform { lo: 0.5, hi: 2.0 }, 1)?;
//! let cfg = optim::VamoConfig { epochs: 3, inner_steps: 10, alpha: 0.2, ..Default::default() }
//!     .with_step(0.1);
//! let x0 = vamo::ParamVector::from_vec(vec![1.0; 5]);
//! let ledger = QueryLedger::new();
//! let trace = optim::vamo_run(&problem, &cfg, &x0, &ledger)?;
//! assert!(trace.final_loss() < trace.records[0].loss);
//! # Ok::<(), vamo::VamoError>(())
//! ```

pub mod data;
mod error;
mod ledger;
mod minibatch;
mod objective;
pub mod optim;
pub mod problems;
mod rng;
mod vector;
pub mod verify;
pub mod zo;

#[cfg(test)]
mod test_support;

pub use error::{Result, VamoError};
pub use ledger::{QueryCounts, QueryLedger};
pub use minibatch::{sample_minibatch, Minibatch, SamplingMode};
pub use objective::{batch_gradient, check_gradient, Differentiable, GradientCheck, Objective};
pub use rng::{Purpose, RngStream};
pub use vector::ParamVector;
