use thiserror::Error;

use crate::config::SweepPoint;

/// Final losses of every repetition at one sweep point. A diverged
/// repetition contributes a non-finite loss.
#[derive(Clone, Debug, PartialEq)]
pub struct PointOutcome {
    pub point: SweepPoint,
    pub final_losses: Vec<f64>,
}

impl PointOutcome {
    /// Mean final loss, or `+∞` if any repetition failed to finish.
    pub fn mean_final_loss(&self) -> f64 {
        if self.final_losses.is_empty() || self.final_losses.iter().any(|l| !l.is_finite()) {
            return f64::INFINITY;
        }
        self.final_losses.iter().sum::<f64>() / self.final_losses.len() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub mean_final_loss: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum SelectError {
    #[error("no sweep points to select from")]
    Empty,
    #[error("every sweep point has a diverged repetition")]
    NoFiniteRun,
}

/// Picks the point with the lowest mean final loss. Ties go to the smaller
/// learning rate, then to the smaller alpha, then to the earlier point.
pub fn sweep_select(outcomes: &[PointOutcome]) -> Result<Selection, SelectError> {
    if outcomes.is_empty() {
        return Err(SelectError::Empty);
    }
    let (index, best) = outcomes
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            a.mean_final_loss()
                .total_cmp(&b.mean_final_loss())
                .then(a.point.eta.total_cmp(&b.point.eta))
                .then(a.point.alpha.total_cmp(&b.point.alpha))
                .then(i.cmp(j))
        })
        .expect("non-empty");
    let mean = best.mean_final_loss();
    if !mean.is_finite() {
        return Err(SelectError::NoFiniteRun);
    }
    Ok(Selection { index, mean_final_loss: mean })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(eta: f64, alpha: f64, losses: &[f64]) -> PointOutcome {
        PointOutcome { point: SweepPoint { eta, alpha, q: 1, inner_steps: 10 }, final_losses: losses.to_vec() }
    }

    #[test]
    fn single_point_wins() {
        assert_eq!(sweep_select(&[at(0.1, 0.0, &[5.0])]).unwrap().index, 0);
    }

    #[test]
    fn ties_prefer_small_step_then_small_alpha() {
        let pts = [at(0.1, 0.0, &[1.0]), at(0.01, 0.5, &[1.0]), at(0.01, 0.1, &[1.0]), at(0.05, 0.0, &[2.0])];
        assert_eq!(sweep_select(&pts).unwrap().index, 2);
    }

    #[test]
    fn lowest_mean_wins_and_divergence_disqualifies() {
        let pts = [at(0.1, 0.0, &[0.1, f64::INFINITY]), at(0.01, 0.0, &[1.0, 3.0]), at(0.03, 0.0, &[1.0, 2.0])];
        let s = sweep_select(&pts).unwrap();
        assert_eq!((s.index, s.mean_final_loss), (2, 1.5));
    }

    #[test]
    fn errors() {
        assert_eq!(sweep_select(&[]), Err(SelectError::Empty));
        assert_eq!(sweep_select(&[at(0.1, 0.0, &[f64::NAN])]), Err(SelectError::NoFiniteRun));
    }
}
