use rand::Rng;

use crate::error::{Result, VamoError};
use crate::rng::RngStream;
use crate::vector::ParamVector;

use super::estimator::{sample_unit_sphere, Smoothing};

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Draws `v ~ U(B^d)`: a sphere draw scaled by `U^{1/d}`.
pub fn sample_unit_ball(rng: &mut RngStream, d: usize) -> Result<ParamVector> {
    let mut v = sample_unit_sphere(rng, d)?;
    let r: f64 = rng.random::<f64>().powf(1.0 / d as f64);
    v.scale(r);
    Ok(v)
}

/// Monte Carlo estimate of the ball-smoothed value `f_μ(x) = E_v[f(x + μv)]`.
///
/// Uses a running (Welford) mean, so a constant `f` returns that constant
/// exactly with zero standard error.
pub fn smoothed_value_mc<F>(
    f: F,
    x: &[f64],
    smoothing: Smoothing,
    trials: usize,
    rng: &mut RngStream,
) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    if trials < 100 {
        return Err(VamoError::invalid("smoothed-value estimate needs at least 100 trials"));
    }
    let d = x.len();
    let mu = smoothing.mu();
    let mut probe = vec![0.0; d];
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for k in 1..=trials {
        let v = sample_unit_ball(rng, d)?;
        for ((p, xv), vv) in probe.iter_mut().zip(x).zip(v.iter()) {
            *p = xv + mu * vv;
        }
        let y = f(&probe);
        if !y.is_finite() {
            return Err(VamoError::Evaluation { sample: 0, point: probe });
        }
        let delta = y - mean;
        mean += delta / k as f64;
        m2 += delta * (y - mean);
    }
    let var = m2 / (trials - 1) as f64;
    Ok(McEstimate { estimate: mean, std_error: (var / trials as f64).sqrt(), trials })
}
