//! Query accounting.
//!
//! One query is one forward or one backward pass of one data sample. An
//! exact minibatch gradient on `b` samples is `b` forward plus `b` backward
//! passes; every function evaluation made by a zeroth-order estimator is one
//! forward pass. Vector arithmetic is free.
//!
//! The multi-point estimator evaluates the base point once and each of the
//! `q` perturbed points once, so it is charged `q + 1` forward passes. The
//! ledger separately tallies the `2q` figure that the two-evaluations-per-
//! direction convention would give, so tables can quote either.

use std::sync::atomic::{AtomicU64, Ordering};

#[derive(Debug, Default)]
pub struct QueryLedger {
    forward: AtomicU64,
    backward: AtomicU64,
    zo_evals: AtomicU64,
    zo_paper_evals: AtomicU64,
}

/// A point-in-time copy of the ledger counters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct QueryCounts {
    pub forward: u64,
    pub backward: u64,
    /// Forward passes that were zeroth-order function evaluations.
    pub zo_evals: u64,
    /// The same evaluations counted at two per direction.
    pub zo_paper_evals: u64,
}

impl QueryCounts {
    pub fn total(&self) -> u64 {
        self.forward + self.backward
    }

    /// Total under the two-evaluations-per-direction convention.
    pub fn paper_convention_total(&self) -> u64 {
        self.forward - self.zo_evals + self.zo_paper_evals + self.backward
    }
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// An exact minibatch gradient on `b` samples.
    pub fn charge_fo_minibatch(&self, b: u64) {
        self.forward.fetch_add(b, Ordering::Relaxed);
        self.backward.fetch_add(b, Ordering::Relaxed);
    }

    /// `evals` single-sample function evaluations.
    pub fn charge_zo_evals(&self, evals: u64) {
        self.forward.fetch_add(evals, Ordering::Relaxed);
        self.zo_evals.fetch_add(evals, Ordering::Relaxed);
        self.zo_paper_evals.fetch_add(evals, Ordering::Relaxed);
    }

    /// One `q`-direction estimate of one component: `q + 1` evaluations
    /// actually made, `2q` under the paper-table convention.
    pub fn charge_zo_estimate(&self, q: u64) {
        self.forward.fetch_add(q + 1, Ordering::Relaxed);
        self.zo_evals.fetch_add(q + 1, Ordering::Relaxed);
        self.zo_paper_evals.fetch_add(2 * q, Ordering::Relaxed);
    }

    pub fn forward_passes(&self) -> u64 {
        self.forward.load(Ordering::Relaxed)
    }

    pub fn backward_passes(&self) -> u64 {
        self.backward.load(Ordering::Relaxed)
    }

    pub fn total_queries(&self) -> u64 {
        self.forward_passes() + self.backward_passes()
    }

    pub fn snapshot(&self) -> QueryCounts {
        QueryCounts {
            forward: self.forward_passes(),
            backward: self.backward_passes(),
            zo_evals: self.zo_evals.load(Ordering::Relaxed),
            zo_paper_evals: self.zo_paper_evals.load(Ordering::Relaxed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fo_minibatch_costs_two_per_sample() {
        let l = QueryLedger::new();
        l.charge_fo_minibatch(32);
        assert_eq!(l.total_queries(), 64);
        l.charge_fo_minibatch(0);
        assert_eq!(l.total_queries(), 64);
    }

    #[test]
    fn charges_are_additive() {
        let l = QueryLedger::new();
        for _ in 0..10 {
            l.charge_fo_minibatch(1);
        }
        assert_eq!((l.forward_passes(), l.backward_passes()), (10, 10));
    }

    #[test]
    fn zo_estimates() {
        let l = QueryLedger::new();
        l.charge_zo_estimate(1);
        assert_eq!(l.forward_passes(), 2);
        let l = QueryLedger::new();
        l.charge_zo_estimate(5);
        let c = l.snapshot();
        assert_eq!(c.forward, 6);
        assert_eq!(c.backward, 0);
        assert_eq!(c.paper_convention_total(), 10);
        l.charge_zo_evals(0);
        assert_eq!(l.snapshot(), c);
    }

    #[test]
    fn concurrent_increments_sum_exactly() {
        let l = QueryLedger::new();
        std::thread::scope(|s| {
            for _ in 0..8 {
                s.spawn(|| {
                    for _ in 0..1000 {
                        l.charge_fo_minibatch(3);
                        l.charge_zo_estimate(2);
                    }
                });
            }
        });
        assert_eq!(l.backward_passes(), 8 * 1000 * 3);
        assert_eq!(l.forward_passes(), 8 * 1000 * (3 + 3));
    }
}
