use crate::error::{Result, VamoError};
use crate::vector::ParamVector;

/// `fo − α (zo_mb − zo_full)`: an exact minibatch gradient corrected by the
/// checkpoint control variate.
///
/// `alpha = 0` returns `fo` unchanged, bit for bit.
pub fn hybrid_blend(fo: &ParamVector, zo_mb: &ParamVector, zo_full: &ParamVector, alpha: f64) -> Result<ParamVector> {
    zo_mb.check_dim(fo.dim())?;
    zo_full.check_dim(fo.dim())?;
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(VamoError::invalid(format!("alpha must be >= 0, got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(fo.clone());
    }
    let mut out = fo.clone();
    out.axpy(-alpha, &zo_mb.sub(zo_full));
    Ok(out)
}
