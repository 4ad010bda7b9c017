use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Result, VamoError};
use crate::objective::{Differentiable, Objective};
use crate::rng::{Purpose, RngStream};
use crate::vector::ParamVector;

/// Input features per sample in the default construction.
pub const DEFAULT_FEATURE_DIM: usize = 8;

/// Relative scale of the label noise.
pub const LABEL_NOISE: f64 = 0.05;

/// Least squares through a one-hidden-layer tanh network,
/// `f_i(x) = (h(x; z_i) − y_i)²` with `h(x; z) = Σ_k v_k tanh(w_kᵀz + c_k)`.
///
/// The parameter vector packs `[W (row-major, width × p), c, v]`, so
/// `d = width · (p + 2)`. Inputs are standard normal; labels come from a
/// random ground-truth network plus Gaussian noise at [`LABEL_NOISE`] times
/// the RMS clean output.
#[derive(Clone, Debug)]
pub struct NonconvexLeastSquares {
    feature_dim: usize,
    width: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
    truth: ParamVector,
}

impl NonconvexLeastSquares {
    pub fn generate(n: usize, dim: usize, seed: u64) -> Result<Self> {
        Self::with_feature_dim(n, dim, DEFAULT_FEATURE_DIM, seed)
    }

    pub fn with_feature_dim(n: usize, dim: usize, feature_dim: usize, seed: u64) -> Result<Self> {
        if n == 0 || feature_dim == 0 {
            return Err(VamoError::invalid("need n >= 1 and at least one feature"));
        }
        if dim == 0 || !dim.is_multiple_of(feature_dim + 2) {
            return Err(VamoError::invalid(format!(
                "dimension {dim} is not a positive multiple of feature_dim + 2 = {}",
                feature_dim + 2
            )));
        }
        let width = dim / (feature_dim + 2);
        let mut rng = RngStream::new(seed, Purpose::DataGeneration);
        let inputs: Vec<f64> = (0..n * feature_dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let truth = random_params(width, feature_dim, &mut rng);
        let mut problem = NonconvexLeastSquares { feature_dim, width, inputs, targets: vec![0.0; n], truth };
        let clean: Vec<f64> = (0..n).map(|i| problem.predict(&problem.truth, i)).collect();
        let rms = (clean.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
        let noise = Normal::new(0.0, LABEL_NOISE * rms).expect("finite scale");
        problem.targets = clean.into_iter().map(|c| c + noise.sample(&mut rng)).collect();
        Ok(problem)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn ground_truth(&self) -> &ParamVector {
        &self.truth
    }

    /// A random starting point with the same scaling as the ground truth,
    /// drawn from its own stream.
    pub fn initial_point(&self, seed: u64) -> ParamVector {
        let mut rng = RngStream::new(seed ^ 0x9e37_79b9_7f4a_7c15, Purpose::DataGeneration);
        random_params(self.width, self.feature_dim, &mut rng)
    }

    fn predict(&self, x: &[f64], i: usize) -> f64 {
        let (w, c, v) = self.split(x);
        let z = self.input(i);
        (0..self.width)
            .map(|k| v[k] * (dot(&w[k * self.feature_dim..(k + 1) * self.feature_dim], z) + c[k]).tanh())
            .sum()
    }

    fn split<'x>(&self, x: &'x [f64]) -> (&'x [f64], &'x [f64], &'x [f64]) {
        let (w, rest) = x.split_at(self.width * self.feature_dim);
        let (c, v) = rest.split_at(self.width);
        (w, c, v)
    }

    fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.feature_dim..(i + 1) * self.feature_dim]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn gauss(rng: &mut RngStream) -> f64 {
    StandardNormal.sample(rng)
}

fn random_params(width: usize, p: usize, rng: &mut RngStream) -> ParamVector {
    let w_scale = 1.0 / (p as f64).sqrt();
    let v_scale = 1.0 / (width as f64).sqrt();
    let mut x = Vec::with_capacity(width * (p + 2));
    for _ in 0..width * p {
        x.push(w_scale * gauss(rng));
    }
    for _ in 0..width {
        x.push(0.1 * gauss(rng));
    }
    for _ in 0..width {
        x.push(v_scale * gauss(rng));
    }
    ParamVector::from_vec(x)
}

impl Objective for NonconvexLeastSquares {
    fn num_samples(&self) -> usize {
        self.targets.len()
    }

    fn dim(&self) -> usize {
        self.width * (self.feature_dim + 2)
    }

    fn value(&self, i: usize, x: &[f64]) -> f64 {
        let r = self.predict(x, i) - self.targets[i];
        r * r
    }

    fn as_differentiable(&self) -> Option<&dyn Differentiable> {
        Some(self)
    }
}

impl Differentiable for NonconvexLeastSquares {
    fn gradient(&self, i: usize, x: &[f64]) -> ParamVector {
        let p = self.feature_dim;
        let (w, c, v) = self.split(x);
        let z = self.input(i);
        let acts: Vec<f64> = (0..self.width).map(|k| (dot(&w[k * p..(k + 1) * p], z) + c[k]).tanh()).collect();
        let pred: f64 = acts.iter().zip(v).map(|(a, b)| a * b).sum();
        let r2 = 2.0 * (pred - self.targets[i]);
        let mut g = ParamVector::zeros(self.dim());
        let (gw, rest) = g.split_at_mut(self.width * p);
        let (gc, gv) = rest.split_at_mut(self.width);
        for k in 0..self.width {
            gv[k] = r2 * acts[k];
            let pre = r2 * v[k] * (1.0 - acts[k] * acts[k]);
            gc[k] = pre;
            for j in 0..p {
                gw[k * p + j] = pre * z[j];
            }
        }
        g
    }
}
