use vamo::data::{load_csv, load_idx, normalize_unit_interval, synth_digits, Dataset};
use vamo::problems::{MlpClassifier, NonconvexLeastSquares, QuadraticProblem, Spectrum};
use vamo::{Objective, ParamVector, Purpose, RngStream, VamoError};

use crate::config::{DigitsSource, ProblemSpec, SpectrumKind};

/// A constructed objective with its starting point.
pub enum BuiltProblem {
    Quadratic(QuadraticProblem, ParamVector),
    NonconvexLs(NonconvexLeastSquares, ParamVector),
    DigitsMlp(MlpClassifier, ParamVector),
}

impl BuiltProblem {
    pub fn objective(&self) -> &dyn Objective {
        match self {
            BuiltProblem::Quadratic(p, _) => p,
            BuiltProblem::NonconvexLs(p, _) => p,
            BuiltProblem::DigitsMlp(p, _) => p,
        }
    }

    pub fn start(&self) -> &ParamVector {
        match self {
            BuiltProblem::Quadratic(_, x) | BuiltProblem::NonconvexLs(_, x) | BuiltProblem::DigitsMlp(_, x) => x,
        }
    }
}

/// Parameter dimension implied by the problem table, when it can be known
/// without reading data files. Errors name the offending key.
pub(crate) fn declared_dim(spec: &ProblemSpec) -> Result<usize, (&'static str, String)> {
    match spec {
        ProblemSpec::Quadratic { dim, samples, lo, hi, .. } => {
            if *dim == 0 {
                return Err(("dim", "must be at least 1".into()));
            }
            if *samples == 0 {
                return Err(("samples", "must be at least 1".into()));
            }
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(("lo", format!("need lo <= hi, got [{lo}, {hi}]")));
            }
            Ok(*dim)
        }
        ProblemSpec::NonconvexLs { samples, dim, feature_dim, .. } => {
            if *samples == 0 {
                return Err(("samples", "must be at least 1".into()));
            }
            if *feature_dim == 0 || *dim == 0 || dim % (feature_dim + 2) != 0 {
                return Err(("dim", format!("must be a positive multiple of feature_dim + 2 = {}", feature_dim + 2)));
            }
            Ok(*dim)
        }
        ProblemSpec::DigitsMlp { source, samples, side, classes, images, labels, table, .. } => {
            if *classes < 2 {
                return Err(("classes", "need at least two classes".into()));
            }
            match source {
                DigitsSource::Synth if *samples < *classes => {
                    Err(("samples", format!("need at least {classes} examples")))
                }
                DigitsSource::Idx if images.is_none() || labels.is_none() => {
                    Err(("images", "an idx source needs `images` and `labels`".into()))
                }
                DigitsSource::Csv if table.is_none() => Err(("table", "a csv source needs `table`".into())),
                // File inputs fix their own width; assume square images of `side`.
                _ => Ok(MlpClassifier::param_count(side * side, *classes)),
            }
        }
    }
}

pub fn build_problem(spec: &ProblemSpec) -> Result<BuiltProblem, VamoError> {
    let seed = spec.seed().unwrap_or(0);
    match spec {
        ProblemSpec::Quadratic { dim, samples, spectrum, lo, hi, start, .. } => {
            let s = match spectrum {
                SpectrumKind::Uniform => Spectrum::Uniform { lo: *lo, hi: *hi },
                SpectrumKind::Identity => Spectrum::Identity,
            };
            let p = QuadraticProblem::generate(*dim, *samples, s, seed)?;
            Ok(BuiltProblem::Quadratic(p, ParamVector::from_vec(vec![*start; *dim])))
        }
        ProblemSpec::NonconvexLs { samples, dim, feature_dim, .. } => {
            let p = NonconvexLeastSquares::with_feature_dim(*samples, *dim, *feature_dim, seed)?;
            let x0 = p.initial_point(seed);
            Ok(BuiltProblem::NonconvexLs(p, x0))
        }
        ProblemSpec::DigitsMlp { source, samples, side, classes, images, labels, table, label_column, .. } => {
            let data = match source {
                DigitsSource::Synth => synth_digits(*samples, *side, *classes, seed)?,
                DigitsSource::Idx => {
                    let ds = load_idx(images.as_ref().unwrap(), labels.as_ref().unwrap())?;
                    keep(normalize_unit_interval(&ds), *samples, seed)?
                }
                DigitsSource::Csv => {
                    let ds = load_csv(table.as_ref().unwrap(), label_column)?;
                    keep(normalize_unit_interval(&ds), *samples, seed)?
                }
            };
            let mlp = MlpClassifier::new(&data, *classes)?;
            let x0 = mlp.glorot_init(seed);
            Ok(BuiltProblem::DigitsMlp(mlp, x0))
        }
    }
}

fn keep(ds: Dataset, samples: usize, seed: u64) -> Result<Dataset, VamoError> {
    if samples == 0 || samples >= ds.rows() {
        return Ok(ds);
    }
    let mut rng = RngStream::new(seed, Purpose::DataGeneration);
    Ok(ds.subsample(samples, &mut rng)?)
}
