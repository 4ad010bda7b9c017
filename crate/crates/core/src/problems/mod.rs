//! Benchmark objectives with exact gradients.

mod linalg;
mod mlp;
mod nonconvex_ls;
mod quadratic;

pub use mlp::MlpClassifier;
pub use nonconvex_ls::{NonconvexLeastSquares, DEFAULT_FEATURE_DIM, LABEL_NOISE};
pub use quadratic::{QuadraticProblem, Spectrum};
