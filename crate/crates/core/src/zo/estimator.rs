use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, VamoError};
use crate::ledger::QueryLedger;
use crate::objective::{checked_value, Objective};
use crate::rng::{Purpose, RngStream};
use crate::vector::ParamVector;

/// Smallest admissible smoothing radius. Below this, at 64-bit precision,
/// `f(x + μu) − f(x)` is mostly rounding.
pub const MU_FLOOR: f64 = 1e-8;

/// Smoothing radius `μ` of the finite-difference estimators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Smoothing {
    mu: f64,
}

impl Smoothing {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu >= MU_FLOOR) {
            return Err(VamoError::invalid(format!("smoothing radius {mu} is below the floor {MU_FLOOR}")));
        }
        Ok(Smoothing { mu })
    }

    pub fn mu(self) -> f64 {
        self.mu
    }
}

/// Draws `u ~ U(S^{d-1})` by normalizing a standard Gaussian vector.
pub fn sample_unit_sphere(rng: &mut RngStream, d: usize) -> Result<ParamVector> {
    if d == 0 {
        return Err(VamoError::invalid("sphere dimension must be at least 1"));
    }
    loop {
        let mut u: ParamVector = (0..d).map(|_| StandardNormal.sample(&mut *rng)).collect();
        let norm = u.norm();
        if norm > 0.0 {
            for v in u.iter_mut() {
                *v /= norm;
            }
            return Ok(u);
        }
    }
}

/// `q` unit directions, regenerable from a single seed.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    seed: Option<u64>,
    directions: Vec<ParamVector>,
}

impl DirectionSet {
    /// Regenerates the `q` directions belonging to `seed`.
    pub fn from_seed(seed: u64, q: usize, d: usize) -> Result<Self> {
        if q == 0 {
            return Err(VamoError::invalid("a direction set needs q >= 1"));
        }
        let mut rng = RngStream::new(seed, Purpose::DirectionSampling);
        let directions = (0..q).map(|_| sample_unit_sphere(&mut rng, d)).collect::<Result<_>>()?;
        Ok(DirectionSet { seed: Some(seed), directions })
    }

    /// Wraps explicit directions; each must have unit norm.
    pub fn from_directions(directions: Vec<ParamVector>) -> Result<Self> {
        if directions.is_empty() {
            return Err(VamoError::invalid("a direction set needs q >= 1"));
        }
        let d = directions[0].dim();
        for u in &directions {
            u.check_dim(d)?;
            check_unit(u)?;
        }
        Ok(DirectionSet { seed: None, directions })
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn q(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[ParamVector] {
        &self.directions
    }
}

fn check_unit(u: &ParamVector) -> Result<()> {
    if (u.norm() - 1.0).abs() > 1e-9 {
        return Err(VamoError::invalid(format!("direction has norm {} instead of 1", u.norm())));
    }
    Ok(())
}

/// Two-point estimate `(d/μ)[f_i(x + μu) − f_i(x)] u`. Charges 2 forward passes.
pub fn two_point_estimate<O: Objective + ?Sized>(
    obj: &O,
    i: usize,
    x: &[f64],
    smoothing: Smoothing,
    u: &ParamVector,
    ledger: &QueryLedger,
) -> Result<ParamVector> {
    check_unit(u)?;
    u.check_dim(x.len())?;
    let out = directional_estimate(obj, i, x, smoothing, std::slice::from_ref(u))?;
    ledger.charge_zo_estimate(1);
    Ok(out)
}

/// Multi-point estimate `(d/(μq)) Σ_j [f_i(x + μu_j) − f_i(x)] u_j`.
///
/// `f_i(x)` is evaluated once and shared across directions, so the charge
/// is `q + 1` forward passes.
pub fn multi_point_estimate<O: Objective + ?Sized>(
    obj: &O,
    i: usize,
    x: &[f64],
    smoothing: Smoothing,
    dirs: &DirectionSet,
    ledger: &QueryLedger,
) -> Result<ParamVector> {
    if let Some(u) = dirs.directions.first() {
        u.check_dim(x.len())?;
    }
    let out = directional_estimate(obj, i, x, smoothing, &dirs.directions)?;
    ledger.charge_zo_estimate(dirs.q() as u64);
    Ok(out)
}

// Shared kernel: with one direction this is exactly the two-point formula,
// in the same floating-point operation order.
fn directional_estimate<O: Objective + ?Sized>(
    obj: &O,
    i: usize,
    x: &[f64],
    smoothing: Smoothing,
    directions: &[ParamVector],
) -> Result<ParamVector> {
    let d = x.len();
    let mu = smoothing.mu();
    let base = checked_value(obj, i, x)?;
    let mut probe = vec![0.0; d];
    let mut acc = ParamVector::zeros(d);
    for u in directions {
        for ((p, xv), uv) in probe.iter_mut().zip(x).zip(u.iter()) {
            *p = xv + mu * uv;
        }
        let shifted = checked_value(obj, i, &probe)?;
        acc.axpy(shifted - base, u);
    }
    acc.scale(d as f64 / (mu * directions.len() as f64));
    Ok(acc)
}
