use rand::Rng;

use crate::data::Dataset;
use crate::error::{Result, VamoError};
use crate::objective::{Differentiable, Objective};
use crate::rng::{Purpose, RngStream};
use crate::vector::ParamVector;

const H1: usize = 32;
const H2: usize = 16;

/// A `input → 32 → 16 → classes` ReLU network with softmax cross-entropy,
/// one component per training example.
///
/// Parameters are packed as `[W1, b1, W2, b2, W3, b3]` with each weight
/// matrix row-major (`out × in`).
#[derive(Clone, Debug)]
pub struct MlpClassifier {
    input: usize,
    classes: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
}

struct Forward {
    pre1: [f64; H1],
    act1: [f64; H1],
    pre2: [f64; H2],
    act2: [f64; H2],
    logits: Vec<f64>,
}

struct Layout {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    w3: usize,
    b3: usize,
    end: usize,
}

impl MlpClassifier {
    pub const HIDDEN: [usize; 2] = [H1, H2];

    /// Parameter count `(in·32 + 32) + (32·16 + 16) + (16·C + C)`.
    pub fn param_count(input: usize, classes: usize) -> usize {
        (input * H1 + H1) + (H1 * H2 + H2) + (H2 * classes + classes)
    }

    pub fn new(data: &Dataset, classes: usize) -> Result<Self> {
        if data.rows() == 0 {
            return Err(VamoError::invalid("dataset is empty"));
        }
        if classes < 2 {
            return Err(VamoError::invalid("a classifier needs at least two classes"));
        }
        let labels =
            data.classes().ok_or_else(|| VamoError::invalid("dataset has real-valued targets, not classes"))?;
        if let Some(&bad) = labels.iter().find(|&&c| c >= classes) {
            return Err(VamoError::invalid(format!("label {bad} out of range for {classes} classes")));
        }
        Ok(MlpClassifier { input: data.cols(), classes, features: data.features().to_vec(), labels: labels.to_vec() })
    }

    pub fn input_dim(&self) -> usize {
        self.input
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Glorot-uniform weights and zero biases from the data stream of `seed`.
    pub fn glorot_init(&self, seed: u64) -> ParamVector {
        let mut rng = RngStream::new(seed, Purpose::DataGeneration);
        let l = self.layout();
        let mut x = ParamVector::zeros(l.end);
        for (start, fan_in, fan_out) in [(l.w1, self.input, H1), (l.w2, H1, H2), (l.w3, H2, self.classes)] {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for v in &mut x[start..start + fan_in * fan_out] {
                *v = rng.random_range(-limit..limit);
            }
        }
        x
    }

    /// Fraction of examples whose arg-max logit is the label.
    pub fn accuracy(&self, x: &[f64]) -> f64 {
        let hits = (0..self.labels.len())
            .filter(|&i| {
                let f = self.forward(i, x);
                let best = (0..self.classes).max_by(|&a, &b| f.logits[a].total_cmp(&f.logits[b])).unwrap();
                best == self.labels[i]
            })
            .count();
        hits as f64 / self.labels.len() as f64
    }

    fn layout(&self) -> Layout {
        let w1 = 0;
        let b1 = w1 + self.input * H1;
        let w2 = b1 + H1;
        let b2 = w2 + H1 * H2;
        let w3 = b2 + H2;
        let b3 = w3 + H2 * self.classes;
        Layout { w1, b1, w2, b2, w3, b3, end: b3 + self.classes }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.input..(i + 1) * self.input]
    }

    fn forward(&self, i: usize, x: &[f64]) -> Forward {
        let l = self.layout();
        let z = self.row(i);
        let mut pre1 = [0.0; H1];
        let mut act1 = [0.0; H1];
        for j in 0..H1 {
            let w = &x[l.w1 + j * self.input..l.w1 + (j + 1) * self.input];
            pre1[j] = w.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() + x[l.b1 + j];
            act1[j] = pre1[j].max(0.0);
        }
        let mut pre2 = [0.0; H2];
        let mut act2 = [0.0; H2];
        for k in 0..H2 {
            let w = &x[l.w2 + k * H1..l.w2 + (k + 1) * H1];
            pre2[k] = w.iter().zip(&act1).map(|(a, b)| a * b).sum::<f64>() + x[l.b2 + k];
            act2[k] = pre2[k].max(0.0);
        }
        let logits = (0..self.classes)
            .map(|c| {
                let w = &x[l.w3 + c * H2..l.w3 + (c + 1) * H2];
                w.iter().zip(&act2).map(|(a, b)| a * b).sum::<f64>() + x[l.b3 + c]
            })
            .collect();
        Forward { pre1, act1, pre2, act2, logits }
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|a| (a - m).exp()).sum::<f64>().ln()
}

impl Objective for MlpClassifier {
    fn num_samples(&self) -> usize {
        self.labels.len()
    }

    fn dim(&self) -> usize {
        Self::param_count(self.input, self.classes)
    }

    fn value(&self, i: usize, x: &[f64]) -> f64 {
        let f = self.forward(i, x);
        log_sum_exp(&f.logits) - f.logits[self.labels[i]]
    }

    fn as_differentiable(&self) -> Option<&dyn Differentiable> {
        Some(self)
    }
}

impl Differentiable for MlpClassifier {
    fn gradient(&self, i: usize, x: &[f64]) -> ParamVector {
        let l = self.layout();
        let z = self.row(i);
        let f = self.forward(i, x);
        let lse = log_sum_exp(&f.logits);
        let mut dlogit: Vec<f64> = f.logits.iter().map(|v| (v - lse).exp()).collect();
        dlogit[self.labels[i]] -= 1.0;

        let mut g = ParamVector::zeros(l.end);
        let mut dact2 = [0.0; H2];
        for c in 0..self.classes {
            g[l.b3 + c] = dlogit[c];
            for k in 0..H2 {
                g[l.w3 + c * H2 + k] = dlogit[c] * f.act2[k];
                dact2[k] += x[l.w3 + c * H2 + k] * dlogit[c];
            }
        }
        let mut dact1 = [0.0; H1];
        for k in 0..H2 {
            let d = if f.pre2[k] > 0.0 { dact2[k] } else { 0.0 };
            g[l.b2 + k] = d;
            for j in 0..H1 {
                g[l.w2 + k * H1 + j] = d * f.act1[j];
                dact1[j] += x[l.w2 + k * H1 + j] * d;
            }
        }
        for j in 0..H1 {
            let d = if f.pre1[j] > 0.0 { dact1[j] } else { 0.0 };
            g[l.b1 + j] = d;
            for (gw, zv) in g[l.w1 + j * self.input..l.w1 + (j + 1) * self.input].iter_mut().zip(z) {
                *gw = d * zv;
            }
        }
        g
    }

    /// Smooth when every hidden pre-activation is well away from zero.
    fn is_smooth_near(&self, i: usize, x: &[f64], h: f64) -> bool {
        let f = self.forward(i, x);
        let margin = f.pre1.iter().chain(&f.pre2).fold(f64::INFINITY, |m, v| m.min(v.abs()));
        margin > 1e-3f64.max(1e3 * h)
    }
}
