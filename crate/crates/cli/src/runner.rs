//! Executes an experiment: every optimizer, grid point and repetition.
//!
//! Output goes to `OUT/NAME/`:
//!
//! * `LABEL[_pK][_rR].csv` — one trace per run (`_pK` only when the
//!   optimizer has several grid points, `_rR` only with repetitions);
//! * `LABEL[_pK][_rR].meta.toml` — a runnable configuration that repeats
//!   exactly that run, with provenance under `[meta]`;
//! * for sweeps, `sweep_summary.csv` and `LABEL.selected.toml`.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use vamo::optim::{run_method, Method, RunTrace};
use vamo::verify::{random_probes, GRADIENT_STEP, PIECEWISE_TOLERANCE, SMOOTH_TOLERANCE};
use vamo::{check_gradient, Purpose, QueryLedger, RngStream, VamoError};

use crate::config::{AlphaSpec, ConfigError, ExperimentConfig, ExperimentSection, RunMeta, SweepPoint};
use crate::problem::{build_problem, BuiltProblem};
use crate::select::{sweep_select, PointOutcome, SelectError, Selection};
use crate::trace_csv::write_trace;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub parallel: usize,
    pub quiet: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { out_dir: PathBuf::from("out"), parallel: 1, quiet: true }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("cannot read {path}: {source}")]
    ReadConfig { path: PathBuf, source: io::Error },
    #[error("problem construction failed: {0}")]
    Problem(VamoError),
    #[error("{label}: {source}")]
    Run { label: String, source: VamoError },
    #[error("{label}: every run diverged")]
    AllDiverged { label: String },
    #[error("{label}: {source}")]
    Select { label: String, source: SelectError },
    #[error("writing {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("gradient self-check failed: relative error {error:.3e} exceeds {tolerance:e}")]
    GradientGate { error: f64, tolerance: f64 },
    #[error("thread pool: {0}")]
    Pool(String),
}

impl HarnessError {
    /// Process exit code: 2 for configuration errors, 3 when an optimizer
    /// diverged in every run, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::ReadConfig { .. } => 2,
            HarnessError::AllDiverged { .. } => 3,
            HarnessError::Select { source: SelectError::NoFiniteRun, .. } => 3,
            _ => 1,
        }
    }
}

/// One finished (or diverged) run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub label: String,
    pub method: Method,
    pub point_index: usize,
    pub point: SweepPoint,
    pub alpha_spec: AlphaSpec,
    pub repetition: usize,
    pub master_seed: u64,
    pub trace: RunTrace,
    pub diverged_at: Option<usize>,
    pub trace_file: PathBuf,
    pub fwd_queries: u64,
    pub bwd_queries: u64,
}

impl RunOutcome {
    /// Final loss, or `+∞` for a diverged run.
    pub fn final_loss(&self) -> f64 {
        match self.diverged_at {
            Some(_) => f64::INFINITY,
            None => self.trace.final_loss(),
        }
    }
}

#[derive(Debug, Default)]
pub struct ExperimentReport {
    pub runs: Vec<RunOutcome>,
    /// Per optimizer label, the chosen grid point (sweeps only).
    pub selections: BTreeMap<String, Selection>,
    pub dir: PathBuf,
}

impl ExperimentReport {
    pub fn runs_of<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a RunOutcome> + 'a {
        self.runs.iter().filter(move |r| r.label == label)
    }

    /// Per-point outcomes of one optimizer, in grid order.
    pub fn point_outcomes(&self, label: &str) -> Vec<PointOutcome> {
        let mut by_point: BTreeMap<usize, PointOutcome> = BTreeMap::new();
        for r in self.runs_of(label) {
            by_point
                .entry(r.point_index)
                .or_insert_with(|| PointOutcome { point: r.point, final_losses: Vec::new() })
                .final_losses
                .push(r.final_loss());
        }
        by_point.into_values().collect()
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text =
        fs::read_to_string(path).map_err(|source| HarnessError::ReadConfig { path: path.to_path_buf(), source })?;
    Ok(ExperimentConfig::parse(&text)?)
}

struct Job {
    label: String,
    method: Method,
    point_index: usize,
    point: SweepPoint,
    alpha_spec: AlphaSpec,
    repetition: usize,
    master_seed: u64,
    stem: String,
}

/// Runs every job of `cfg`, writes traces and sidecars, and with `select`
/// picks the best grid point of each optimizer.
pub fn execute(cfg: &ExperimentConfig, opts: &RunOptions, select: bool) -> Result<ExperimentReport, HarnessError> {
    let problem = build_problem(&cfg.problem).map_err(HarnessError::Problem)?;
    let dim = problem.objective().dim();
    if cfg.optimizers.values().any(|o| Method::from(o.method).needs_gradients()) {
        gradient_gate(&problem, cfg.experiment.seed)?;
    }
    let dir = opts.out_dir.join(&cfg.experiment.name);
    fs::create_dir_all(&dir).map_err(|source| HarnessError::Write { path: dir.clone(), source })?;

    let reps = cfg.experiment.repetitions;
    let mut jobs = Vec::new();
    for (label, spec) in &cfg.optimizers {
        let points = spec.points(dim).map_err(|m| ConfigError { line: None, key: Some("alpha".into()), message: m })?;
        let multi = points.len() > 1;
        for (k, (point, alpha_spec)) in points.into_iter().enumerate() {
            for r in 0..reps {
                let mut stem = label.clone();
                if multi {
                    stem.push_str(&format!("_p{k}"));
                }
                if reps > 1 {
                    stem.push_str(&format!("_r{r}"));
                }
                jobs.push(Job {
                    label: label.clone(),
                    method: spec.method.into(),
                    point_index: k,
                    point,
                    alpha_spec: alpha_spec.clone(),
                    repetition: r,
                    master_seed: cfg.experiment.seed.wrapping_add(r as u64),
                    stem,
                });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.parallel.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let results: Vec<Result<RunOutcome, HarnessError>> =
        pool.install(|| jobs.par_iter().map(|job| run_job(cfg, &problem, job, &dir, opts)).collect());
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut report = ExperimentReport { runs, selections: BTreeMap::new(), dir: dir.clone() };
    for label in cfg.optimizers.keys() {
        if report.runs_of(label).all(|r| r.diverged_at.is_some()) {
            return Err(HarnessError::AllDiverged { label: label.clone() });
        }
    }
    if select {
        for (label, spec) in &cfg.optimizers {
            let outcomes = report.point_outcomes(label);
            let chosen =
                sweep_select(&outcomes).map_err(|source| HarnessError::Select { label: label.clone(), source })?;
            let best = report.runs_of(label).find(|r| r.point_index == chosen.index).expect("selected point ran");
            let mut selected = ExperimentConfig {
                experiment: cfg.experiment.clone(),
                problem: cfg.problem.clone(),
                optimizers: BTreeMap::from([(label.clone(), spec.at_point(&best.point, &best.alpha_spec))]),
                meta: Some(RunMeta {
                    version: VERSION.into(),
                    alpha_resolved: Some(best.point.alpha),
                    selected_from: Some(chosen.index),
                    mean_final_loss: Some(chosen.mean_final_loss),
                    ..Default::default()
                }),
            };
            selected.experiment.name = format!("{}_{label}_selected", cfg.experiment.name);
            write_file(&dir.join(format!("{label}.selected.toml")), selected.render().as_bytes())?;
            report.selections.insert(label.clone(), chosen);
        }
        write_summary(&report, &dir.join("sweep_summary.csv"))?;
    }
    Ok(report)
}

/// Probes around the starting point per gradient check before any
/// gradient-based run.
pub const GATE_PROBES: usize = 5;

fn gradient_gate(problem: &BuiltProblem, seed: u64) -> Result<(), HarnessError> {
    let Some(obj) = problem.objective().as_differentiable() else {
        return Ok(());
    };
    let (scale, tolerance) = match problem {
        BuiltProblem::DigitsMlp(..) => (0.05, PIECEWISE_TOLERANCE),
        _ => (0.5, SMOOTH_TOLERANCE),
    };
    let mut rng = RngStream::new(seed, Purpose::DataGeneration).child();
    let probes = random_probes(obj.num_samples(), problem.start(), scale, GATE_PROBES, &mut rng);
    let c = check_gradient(obj, &probes, GRADIENT_STEP);
    if c.passes(tolerance) {
        Ok(())
    } else {
        Err(HarnessError::GradientGate { error: c.max_relative_error, tolerance })
    }
}

fn run_job(
    cfg: &ExperimentConfig,
    problem: &BuiltProblem,
    job: &Job,
    dir: &Path,
    opts: &RunOptions,
) -> Result<RunOutcome, HarnessError> {
    let spec = &cfg.optimizers[&job.label];
    let vcfg = spec.vamo_config(&job.point, job.master_seed);
    let ledger = QueryLedger::new();
    let start = Instant::now();
    let (trace, diverged_at) = match run_method(job.method, problem.objective(), &vcfg, problem.start(), &ledger) {
        Ok(t) => (t, None),
        Err(VamoError::Divergence { step, trace }) => (*trace, Some(step)),
        Err(source) => return Err(HarnessError::Run { label: job.label.clone(), source }),
    };
    let trace_file = dir.join(format!("{}.csv", job.stem));
    let mut buf = Vec::new();
    write_trace(&trace.records, cfg.experiment.timing, &mut buf)
        .map_err(|source| HarnessError::Write { path: trace_file.clone(), source })?;
    write_file(&trace_file, &buf)?;

    let outcome = RunOutcome {
        label: job.label.clone(),
        method: job.method,
        point_index: job.point_index,
        point: job.point,
        alpha_spec: job.alpha_spec.clone(),
        repetition: job.repetition,
        master_seed: job.master_seed,
        trace,
        diverged_at,
        trace_file: trace_file.clone(),
        fwd_queries: ledger.forward_passes(),
        bwd_queries: ledger.backward_passes(),
    };
    let sidecar = sidecar_config(cfg, job, &outcome);
    write_file(&dir.join(format!("{}.meta.toml", job.stem)), sidecar.render().as_bytes())?;
    if !opts.quiet {
        let status = match diverged_at {
            Some(s) => format!("diverged at step {s}"),
            None => format!("final loss {:.6e}", outcome.final_loss()),
        };
        eprintln!("{}: {status} ({:.1?})", job.stem, start.elapsed());
    }
    Ok(outcome)
}

/// A configuration that repeats exactly this run.
fn sidecar_config(cfg: &ExperimentConfig, job: &Job, outcome: &RunOutcome) -> ExperimentConfig {
    let spec = &cfg.optimizers[&job.label];
    ExperimentConfig {
        experiment: ExperimentSection {
            name: cfg.experiment.name.clone(),
            seed: job.master_seed,
            repetitions: 1,
            timing: cfg.experiment.timing,
        },
        problem: cfg.problem.clone(),
        optimizers: BTreeMap::from([(job.label.clone(), spec.at_point(&job.point, &job.alpha_spec))]),
        meta: Some(RunMeta {
            version: VERSION.into(),
            trace: outcome.trace_file.file_name().map(|f| f.to_string_lossy().into_owned()),
            master_seed: Some(job.master_seed),
            repetition: Some(job.repetition),
            alpha_resolved: Some(job.point.alpha),
            status: Some(match outcome.diverged_at {
                Some(s) => format!("diverged at step {s}"),
                None => "ok".into(),
            }),
            final_loss: outcome.diverged_at.is_none().then(|| outcome.final_loss()),
            ..Default::default()
        }),
    }
}

fn write_summary(report: &ExperimentReport, path: &Path) -> Result<(), HarnessError> {
    let werr = |source: io::Error| HarnessError::Write { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "optimizer",
        "point",
        "eta",
        "alpha",
        "q",
        "inner_steps",
        "repetitions",
        "mean_final_loss",
        "selected",
    ])
    .map_err(|e| werr(e.into()))?;
    let labels: Vec<&String> = report.selections.keys().collect();
    for label in labels {
        let chosen = report.selections[label].index;
        for (k, o) in report.point_outcomes(label).iter().enumerate() {
            w.write_record([
                label.clone(),
                k.to_string(),
                o.point.eta.to_string(),
                o.point.alpha.to_string(),
                o.point.q.to_string(),
                o.point.inner_steps.to_string(),
                o.final_losses.len().to_string(),
                o.mean_final_loss().to_string(),
                (k == chosen).to_string(),
            ])
            .map_err(|e| werr(e.into()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| werr(io::Error::other(e.to_string())))?;
    write_file(path, &bytes)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, bytes).map_err(|source| HarnessError::Write { path: path.to_path_buf(), source })
}
