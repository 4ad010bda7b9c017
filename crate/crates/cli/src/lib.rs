//! Command-line driver for `vamo` experiments.
//!
//! ```text
//! vamo run <config>      every optimizer, grid point and repetition
//! vamo sweep <config>    the same, then pick the best grid point per optimizer
//! vamo verify [check]    the statistical and exact checks (default: all)
//! ```
//!
//! Flags shared by every subcommand: `--seed`, `--out-dir`, `--parallel`,
//! `--quiet`. Exit codes: 0 success, 1 a check failed or a run errored,
//! 2 bad configuration or unknown check, 3 an optimizer diverged in every
//! run.
//!
//! Gradient-based experiments first compare the problem's gradients with
//! central differences near the starting point; a mismatch aborts with
//! exit code 1.

mod cli;
pub mod config;
pub mod problem;
pub mod runner;
pub mod select;
pub mod trace_csv;

pub use cli::main_with_args;
pub use config::{ConfigError, ExperimentConfig, SweepPoint};
pub use runner::{execute, load_config, ExperimentReport, HarnessError, RunOptions, RunOutcome};
pub use select::{sweep_select, PointOutcome, SelectError, Selection};
