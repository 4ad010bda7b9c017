//! Step size, smoothing radius and mixing weight prescribed by the
//! convergence analysis.

use crate::error::{Result, VamoError};
use crate::zo::MU_FLOOR;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prescription {
    pub mu: f64,
    pub eta: f64,
    pub alpha: f64,
    /// The formula gave a radius below [`MU_FLOOR`] and `mu` was raised to it.
    pub mu_clamped: bool,
}

fn check_common(total_steps: usize, smoothness: f64, dim: usize, rho: f64) -> Result<()> {
    if total_steps == 0 {
        return Err(VamoError::invalid("total step count must be at least 1"));
    }
    if !(smoothness.is_finite() && smoothness > 0.0) {
        return Err(VamoError::invalid(format!("smoothness constant must be positive, got {smoothness}")));
    }
    if dim == 0 {
        return Err(VamoError::invalid("dimension must be at least 1"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(VamoError::invalid(format!("rho must lie in (0, 1], got {rho}")));
    }
    Ok(())
}

fn clamp(mu: f64) -> (f64, bool) {
    if mu < MU_FLOOR {
        (MU_FLOOR, true)
    } else {
        (mu, false)
    }
}

/// Two-point setting: `μ = 1/√T`, `η = ρ/L`, `α = 1/d`.
///
/// The analysis needs `ρ ≤ 1/160`; larger values up to 1 are accepted.
///
/// ```
/// let p = vamo::optim::two_point_params(100, 1.0, 100, 1.0 / 160.0)?;
/// assert_eq!((p.mu, p.eta, p.alpha), (0.1, 0.00625, 0.01));
/// # Ok::<(), vamo::VamoError>(())
/// ```
pub fn two_point_params(total_steps: usize, smoothness: f64, dim: usize, rho: f64) -> Result<Prescription> {
    check_common(total_steps, smoothness, dim, rho)?;
    let (mu, mu_clamped) = clamp(1.0 / (total_steps as f64).sqrt());
    Ok(Prescription { mu, eta: rho / smoothness, alpha: 1.0 / dim as f64, mu_clamped })
}

/// `q`-direction setting: `μ = 1/(q√T)`, `η = ρ/L`, `α = q/d`, for `1 ≤ q ≤ d`.
pub fn multi_point_params(total_steps: usize, smoothness: f64, dim: usize, q: usize, rho: f64) -> Result<Prescription> {
    check_common(total_steps, smoothness, dim, rho)?;
    if q == 0 || q > dim {
        return Err(VamoError::invalid(format!("q = {q} outside 1..={dim}; alpha would leave [0, 1]")));
    }
    let (mu, mu_clamped) = clamp(1.0 / (q as f64 * (total_steps as f64).sqrt()));
    Ok(Prescription { mu, eta: rho / smoothness, alpha: q as f64 / dim as f64, mu_clamped })
}
