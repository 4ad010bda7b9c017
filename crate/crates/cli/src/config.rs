//! Experiment configuration files.
//!
//! A configuration is a TOML document with an `[experiment]` table, a
//! `[problem]` table and one `[optimizer.LABEL]` table per optimizer.
//! Unknown keys anywhere are errors. The grid keys of an optimizer (`eta`,
//! `alpha`, `q`, `inner_steps`) take a single value or a list; lists expand
//! into a sweep over their Cartesian product. The grammar is documented in
//! the book chapter on configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use vamo::optim::{CheckpointDirections, CheckpointEstimator, Method, OutputMode, VamoConfig};
use vamo::zo::CacheStrategy;
use vamo::SamplingMode;

/// A configuration problem, with the line and key it concerns when known.
#[derive(Debug, Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}, key `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "key `{k}`: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: ExperimentSection,
    pub problem: ProblemSpec,
    #[serde(rename = "optimizer")]
    pub optimizers: BTreeMap<String, OptimizerSpec>,
    /// Written into sidecars; ignored when a file is run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<RunMeta>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "default_name")]
    pub name: String,
    /// Master seed of repetition 0; repetition `r` uses `seed + r`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub repetitions: usize,
    /// Fill the `wall_ms` column. Off by default so traces are reproducible
    /// byte for byte.
    #[serde(default)]
    pub timing: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection { name: default_name(), seed: 0, repetitions: 1, timing: false }
    }
}

fn default_name() -> String {
    "experiment".into()
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Quadratic {
        dim: usize,
        samples: usize,
        #[serde(default)]
        spectrum: SpectrumKind,
        #[serde(default = "half")]
        lo: f64,
        #[serde(default = "two")]
        hi: f64,
        /// The start is this value in every coordinate.
        #[serde(default = "unit")]
        start: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    NonconvexLs {
        samples: usize,
        dim: usize,
        #[serde(default = "feature_dim")]
        feature_dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    DigitsMlp {
        #[serde(default)]
        source: DigitsSource,
        /// Examples to synthesize, or to keep from a loaded file (0 keeps all).
        #[serde(default)]
        samples: usize,
        #[serde(default = "side")]
        side: usize,
        #[serde(default = "classes")]
        classes: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        images: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<PathBuf>,
        #[serde(default = "label_column")]
        label_column: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

fn half() -> f64 {
    0.5
}
fn two() -> f64 {
    2.0
}
fn unit() -> f64 {
    1.0
}
fn feature_dim() -> usize {
    vamo::problems::DEFAULT_FEATURE_DIM
}
fn side() -> usize {
    8
}
fn classes() -> usize {
    10
}
fn label_column() -> String {
    "label".into()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    #[default]
    Uniform,
    Identity,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DigitsSource {
    #[default]
    Synth,
    Idx,
    Csv,
}

impl ProblemSpec {
    pub fn seed(&self) -> Option<u64> {
        match self {
            ProblemSpec::Quadratic { seed, .. }
            | ProblemSpec::NonconvexLs { seed, .. }
            | ProblemSpec::DigitsMlp { seed, .. } => *seed,
        }
    }

    fn set_seed(&mut self, value: u64) {
        match self {
            ProblemSpec::Quadratic { seed, .. }
            | ProblemSpec::NonconvexLs { seed, .. }
            | ProblemSpec::DigitsMlp { seed, .. } => *seed = Some(value),
        }
    }
}

/// One value or a list of values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> Grid<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            Grid::One(v) => vec![v.clone()],
            Grid::Many(v) => v.clone(),
        }
    }
}

/// A mixing weight: a number, or `"1/d"` / `"q/d"` resolved against the
/// problem dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Value(f64),
    Rule(String),
}

impl AlphaSpec {
    pub fn resolve(&self, q: usize, dim: usize) -> Result<f64, String> {
        match self {
            AlphaSpec::Value(a) => Ok(*a),
            AlphaSpec::Rule(r) => match r.replace(' ', "").as_str() {
                "1/d" => Ok(1.0 / dim as f64),
                "q/d" => Ok(q as f64 / dim as f64),
                other => Err(format!("unknown alpha rule {other:?}; use a number, \"1/d\" or \"q/d\"")),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Vamo,
    FoSgd,
    FoSvrg,
    ZoSgd,
    ZoSvrg,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Method {
        match m {
            MethodName::Vamo => Method::Vamo,
            MethodName::FoSgd => Method::FoSgd,
            MethodName::FoSvrg => Method::FoSvrg,
            MethodName::ZoSgd => Method::ZoSgd,
            MethodName::ZoSvrg => Method::ZoSvrg,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingName {
    #[default]
    WithReplacement,
    WithoutReplacement,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheName {
    #[default]
    Cached,
    Replay,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionsName {
    #[default]
    Reuse,
    Fresh,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckpointName {
    #[default]
    ZerothOrder,
    FirstOrder,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputName {
    #[default]
    Last,
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    pub method: MethodName,
    pub eta: Grid<f64>,
    #[serde(default = "zero_alpha")]
    pub alpha: Grid<AlphaSpec>,
    #[serde(default = "one_q")]
    pub q: Grid<usize>,
    #[serde(default = "default_inner")]
    pub inner_steps: Grid<usize>,
    #[serde(default = "one")]
    pub epochs: usize,
    #[serde(default = "one")]
    pub batch_size: usize,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub sampling: SamplingName,
    #[serde(default)]
    pub cache: CacheName,
    #[serde(default)]
    pub checkpoint_directions: DirectionsName,
    #[serde(default)]
    pub checkpoint: CheckpointName,
    #[serde(default)]
    pub output: OutputName,
    #[serde(default = "one")]
    pub record_every: usize,
}

fn zero_alpha() -> Grid<AlphaSpec> {
    Grid::One(AlphaSpec::Value(0.0))
}
fn one_q() -> Grid<usize> {
    Grid::One(1)
}
fn default_inner() -> Grid<usize> {
    Grid::One(10)
}
fn default_mu() -> f64 {
    1e-3
}

/// Provenance written into sidecars.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunMeta {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetition: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_resolved: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_loss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected_from: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_final_loss: Option<f64>,
}

/// One point of an optimizer's sweep grid, with `alpha` resolved.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub eta: f64,
    pub alpha: f64,
    pub q: usize,
    pub inner_steps: usize,
}

impl OptimizerSpec {
    /// The grid in a fixed order: `eta` outermost, then `alpha`, `q`,
    /// `inner_steps`. Each point carries the alpha spec it came from.
    pub fn points(&self, dim: usize) -> Result<Vec<(SweepPoint, AlphaSpec)>, String> {
        let mut out = Vec::new();
        for eta in self.eta.values() {
            for alpha in self.alpha.values() {
                for q in self.q.values() {
                    for m in self.inner_steps.values() {
                        let a = alpha.resolve(q, dim)?;
                        out.push((SweepPoint { eta, alpha: a, q, inner_steps: m }, alpha.clone()));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn vamo_config(&self, point: &SweepPoint, master_seed: u64) -> VamoConfig {
        VamoConfig {
            epochs: self.epochs,
            inner_steps: point.inner_steps,
            batch_size: self.batch_size,
            mu: self.mu,
            alpha: point.alpha,
            q: point.q,
            sampling: match self.sampling {
                SamplingName::WithReplacement => SamplingMode::WithReplacement,
                SamplingName::WithoutReplacement => SamplingMode::WithoutReplacement,
            },
            cache_strategy: match self.cache {
                CacheName::Cached => CacheStrategy::CachedEstimates,
                CacheName::Replay => CacheStrategy::SeedReplay,
            },
            checkpoint_directions: match self.checkpoint_directions {
                DirectionsName::Reuse => CheckpointDirections::Reuse,
                DirectionsName::Fresh => CheckpointDirections::Fresh,
            },
            checkpoint_estimator: match self.checkpoint {
                CheckpointName::ZerothOrder => CheckpointEstimator::ZerothOrder,
                CheckpointName::FirstOrder => CheckpointEstimator::FirstOrder,
            },
            output_mode: match self.output {
                OutputName::Last => OutputMode::LastIterate,
                OutputName::Uniform => OutputMode::UniformRandomIterate,
            },
            master_seed,
            record_every: self.record_every,
            keep_iterates: false,
            ..Default::default()
        }
        .with_step(point.eta)
    }

    /// The same optimizer restricted to one grid point.
    pub fn at_point(&self, point: &SweepPoint, alpha: &AlphaSpec) -> OptimizerSpec {
        OptimizerSpec {
            eta: Grid::One(point.eta),
            alpha: Grid::One(alpha.clone()),
            q: Grid::One(point.q),
            inner_steps: Grid::One(point.inner_steps),
            ..self.clone()
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates a configuration.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| from_toml(text, &e))?;
        if cfg.problem.seed().is_none() {
            let s = cfg.experiment.seed;
            cfg.problem.set_seed(s);
        }
        cfg.validate(text)?;
        Ok(cfg)
    }

    /// Renders the configuration as TOML that parses back to itself.
    pub fn render(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Replaces the master seed. A problem seed that was left implicit is
    /// pinned first so the problem does not change with it.
    pub fn override_seed(&mut self, seed: u64) {
        if self.problem.seed().is_none() {
            let s = self.experiment.seed;
            self.problem.set_seed(s);
        }
        self.experiment.seed = seed;
    }

    fn validate(&self, text: &str) -> Result<(), ConfigError> {
        let err = |section: &str, key: &str, message: String| ConfigError {
            line: locate(text, section, key),
            key: Some(key.to_string()),
            message,
        };
        if self.experiment.repetitions == 0 {
            return Err(err("experiment", "repetitions", "must be at least 1".into()));
        }
        if self.optimizers.is_empty() {
            return Err(ConfigError { line: None, key: None, message: "no [optimizer.NAME] table".into() });
        }
        let dim = crate::problem::declared_dim(&self.problem).map_err(|(k, m)| err("problem", k, m))?;
        for (label, o) in &self.optimizers {
            let section = format!("optimizer.{label}");
            if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(ConfigError {
                    line: None,
                    key: Some(label.clone()),
                    message: "optimizer labels may use letters, digits, '_' and '-'".into(),
                });
            }
            for (key, empty) in [
                ("eta", o.eta.values().is_empty()),
                ("alpha", o.alpha.values().is_empty()),
                ("q", o.q.values().is_empty()),
                ("inner_steps", o.inner_steps.values().is_empty()),
            ] {
                if empty {
                    return Err(err(&section, key, "empty list".into()));
                }
            }
            let points = o.points(dim).map_err(|m| err(&section, "alpha", m))?;
            for (p, _) in &points {
                let cfg = o.vamo_config(p, 0);
                if let Err(e) = cfg.validate(usize::MAX) {
                    return Err(err(&section, guess_key(&e.to_string()), e.to_string()));
                }
            }
            if o.batch_size == 0 || o.epochs == 0 || o.record_every == 0 {
                return Err(err(&section, "batch_size", "epochs, batch_size and record_every must be positive".into()));
            }
        }
        Ok(())
    }
}

fn guess_key(message: &str) -> &'static str {
    for key in ["inner_steps", "batch_size", "record_every", "epochs", "alpha", "step", "q", "smoothing"] {
        if message.contains(key) {
            return match key {
                "step" => "eta",
                "smoothing" => "mu",
                k => k,
            };
        }
    }
    "eta"
}

fn from_toml(text: &str, e: &toml::de::Error) -> ConfigError {
    let message = e.message().trim().to_string();
    let span_line = e.span().map(|s| line_of(text, s.start));
    // Serde reports unknown fields and bad enum values against the whole
    // table; point at the offending line instead.
    if let Some(key) = quoted(&message, "unknown field `") {
        let line = span_line.and_then(|l| find_key_after(text, l, &key)).or(span_line);
        return ConfigError { line, key: Some(key), message };
    }
    let key = span_line.and_then(|l| key_on_line(text, l));
    ConfigError { line: span_line, key, message }
}

fn quoted(message: &str, prefix: &str) -> Option<String> {
    let start = message.find(prefix)? + prefix.len();
    let end = message[start..].find('`')? + start;
    Some(message[start..end].to_string())
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn key_on_line(text: &str, line: usize) -> Option<String> {
    let l = text.lines().nth(line - 1)?;
    let (k, _) = l.split_once('=')?;
    Some(k.trim().to_string())
}

fn find_key_after(text: &str, from_line: usize, key: &str) -> Option<usize> {
    text.lines()
        .enumerate()
        .skip(from_line)
        .take_while(|(_, l)| !l.trim_start().starts_with('['))
        .find(|(_, l)| l.split_once('=').is_some_and(|(k, _)| k.trim() == key))
        .map(|(i, _)| i + 1)
}

/// Line of `key` inside table `section`, if the file spells it out.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let header = text.lines().position(|l| {
        let t = l.trim();
        t.starts_with('[') && t.trim_matches(|c| c == '[' || c == ']').trim() == section
    })?;
    find_key_after(text, header + 1, key)
}
