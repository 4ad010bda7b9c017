use std::borrow::Cow;

use rand::RngCore;
use rayon::prelude::*;

use crate::error::{Result, VamoError};
use crate::ledger::QueryLedger;
use crate::minibatch::Minibatch;
use crate::objective::Objective;
use crate::rng::RngStream;
use crate::vector::ParamVector;

use super::estimator::{multi_point_estimate, DirectionSet, Smoothing};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum CacheStrategy {
    /// Keep all `n` per-sample estimates (O(nd) memory, no replay cost).
    #[default]
    CachedEstimates,
    /// Keep only the `n` direction seeds and re-evaluate on demand
    /// (O(n) memory, `q + 1` forward passes per replayed sample).
    SeedReplay,
}

/// Zeroth-order gradient information frozen at a checkpoint `x̂`.
///
/// Every sample `i` gets its own direction seed, drawn once at construction.
/// Whatever the strategy, the estimate for sample `i` used later in the
/// epoch is bit-identical to the one that went into `full_zo_grad`, so the
/// minibatch correction `∇̂f_I(x̂) − ∇̂f(x̂)` averages to exactly zero over
/// minibatches.
#[derive(Clone, Debug)]
pub struct CheckpointCache {
    strategy: CacheStrategy,
    x_hat: ParamVector,
    full_zo_grad: ParamVector,
    per_sample_estimates: Option<Vec<ParamVector>>,
    per_sample_seeds: Option<Vec<u64>>,
    q: usize,
    smoothing: Smoothing,
}

impl CheckpointCache {
    pub fn strategy(&self) -> CacheStrategy {
        self.strategy
    }

    pub fn x_hat(&self) -> &ParamVector {
        &self.x_hat
    }

    /// `ĝ = (1/n) Σ_i ∇̂f_i(x̂)`, summed in ascending index order.
    pub fn full_zo_grad(&self) -> &ParamVector {
        &self.full_zo_grad
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    pub fn num_samples(&self) -> usize {
        match (&self.per_sample_estimates, &self.per_sample_seeds) {
            (Some(e), _) => e.len(),
            (None, Some(s)) => s.len(),
            (None, None) => 0,
        }
    }

    pub fn per_sample_seeds(&self) -> Option<&[u64]> {
        self.per_sample_seeds.as_deref()
    }

    /// The estimate for sample `i` that contributed to `full_zo_grad`.
    /// Replaying under [`CacheStrategy::SeedReplay`] charges `q + 1` passes.
    pub fn sample_estimate<O: Objective + ?Sized>(
        &self,
        obj: &O,
        i: usize,
        ledger: &QueryLedger,
    ) -> Result<Cow<'_, ParamVector>> {
        let n = self.num_samples();
        if i >= n {
            return Err(VamoError::invalid(format!("sample index {i} out of range for {n} samples")));
        }
        match self.strategy {
            CacheStrategy::CachedEstimates => {
                let est = self.per_sample_estimates.as_ref().expect("cached strategy stores estimates");
                Ok(Cow::Borrowed(&est[i]))
            }
            CacheStrategy::SeedReplay => {
                let seeds = self.per_sample_seeds.as_ref().expect("replay strategy stores seeds");
                let dirs = DirectionSet::from_seed(seeds[i], self.q, self.x_hat.dim())?;
                let est = multi_point_estimate(obj, i, &self.x_hat, self.smoothing, &dirs, ledger)?;
                Ok(Cow::Owned(est))
            }
        }
    }
}

/// Builds the checkpoint: one fresh `q`-direction estimate per sample.
///
/// Seeds are drawn sequentially from `rng`; the estimates are evaluated in
/// parallel and reduced in ascending index order. Charges `n(q + 1)`
/// forward passes.
pub fn build_checkpoint_cache<O: Objective + ?Sized>(
    obj: &O,
    x_hat: &ParamVector,
    smoothing: Smoothing,
    q: usize,
    strategy: CacheStrategy,
    rng: &mut RngStream,
    ledger: &QueryLedger,
) -> Result<CheckpointCache> {
    let n = obj.num_samples();
    if n == 0 {
        return Err(VamoError::invalid("objective has no samples"));
    }
    if q == 0 {
        return Err(VamoError::invalid("checkpoint needs q >= 1"));
    }
    x_hat.check_dim(obj.dim())?;

    let seeds: Vec<u64> = (0..n).map(|_| rng.next_u64()).collect();
    let results: Vec<Result<ParamVector>> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| {
            let dirs = DirectionSet::from_seed(seed, q, x_hat.dim())?;
            multi_point_estimate(obj, i, x_hat, smoothing, &dirs, ledger)
        })
        .collect();
    let estimates = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut full = ParamVector::zeros(x_hat.dim());
    for e in &estimates {
        full.add_assign(e);
    }
    full.div_count(n);

    let (per_sample_estimates, per_sample_seeds) = match strategy {
        CacheStrategy::CachedEstimates => (Some(estimates), None),
        CacheStrategy::SeedReplay => (None, Some(seeds)),
    };
    Ok(CheckpointCache {
        strategy,
        x_hat: x_hat.clone(),
        full_zo_grad: full,
        per_sample_estimates,
        per_sample_seeds,
        q,
        smoothing,
    })
}

/// `∇̂f_I(x̂)` built from the checkpoint's own per-sample estimates.
///
/// Accumulates in ascending index order, so a batch covering `[n]` returns
/// `full_zo_grad` exactly.
pub fn zo_minibatch_at_checkpoint<O: Objective + ?Sized>(
    cache: &CheckpointCache,
    batch: &Minibatch,
    obj: &O,
    ledger: &QueryLedger,
) -> Result<ParamVector> {
    let n = obj.num_samples();
    if let Some(&bad) = batch.indices().iter().find(|&&i| i >= n) {
        return Err(VamoError::invalid(format!("minibatch index {bad} out of range for {n} samples")));
    }
    let mut acc = ParamVector::zeros(cache.x_hat.dim());
    for i in batch.sorted() {
        acc.add_assign(&cache.sample_estimate(obj, i, ledger)?);
    }
    acc.div_count(batch.len());
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Purpose;
    use crate::test_support::Quartic;
    use crate::SamplingMode;

    struct Shifted {
        n: usize,
        d: usize,
    }

    // f_i(x) = Σ_j (x_j − c_ij)⁴ + sin(x_j) with sample-specific centres.
    impl Objective for Shifted {
        fn num_samples(&self) -> usize {
            self.n
        }
        fn dim(&self) -> usize {
            self.d
        }
        fn value(&self, i: usize, x: &[f64]) -> f64 {
            x.iter()
                .enumerate()
                .map(|(j, v)| {
                    let c = ((i * 7 + j * 3) % 5) as f64 * 0.3 - 0.6;
                    (v - c).powi(4) + v.sin()
                })
                .sum()
        }
    }

    fn build(obj: &Shifted, q: usize, strategy: CacheStrategy, seed: u64) -> (CheckpointCache, QueryLedger) {
        let ledger = QueryLedger::new();
        let x_hat: ParamVector = (0..obj.d).map(|j| 0.1 * j as f64 - 0.2).collect();
        let mut rng = RngStream::new(seed, Purpose::DirectionSampling);
        let c =
            build_checkpoint_cache(obj, &x_hat, Smoothing::new(1e-3).unwrap(), q, strategy, &mut rng, &ledger).unwrap();
        (c, ledger)
    }

    #[test]
    fn single_sample_full_equals_its_estimate() {
        let obj = Shifted { n: 1, d: 4 };
        let (c, l) = build(&obj, 2, CacheStrategy::CachedEstimates, 1);
        let e = c.sample_estimate(&obj, 0, &l).unwrap();
        assert_eq!(e.as_ref(), c.full_zo_grad());
    }

    #[test]
    fn full_grad_is_mean_of_estimates_and_charges_n_q_plus_1() {
        let obj = Shifted { n: 6, d: 5 };
        let (c, l) = build(&obj, 1, CacheStrategy::CachedEstimates, 2);
        assert_eq!(l.forward_passes(), 6 * 2);
        let mut mean = ParamVector::zeros(5);
        for i in 0..6 {
            mean.axpy(1.0 / 6.0, &c.sample_estimate(&obj, i, &l).unwrap());
        }
        let rel = mean.sub(c.full_zo_grad()).norm() / c.full_zo_grad().norm();
        assert!(rel <= 1e-15, "{rel}");
        // Cached lookups are free.
        assert_eq!(l.forward_passes(), 12);
    }

    #[test]
    fn replay_matches_cached_bitwise() {
        let obj = Shifted { n: 6, d: 5 };
        let (cached, _) = build(&obj, 3, CacheStrategy::CachedEstimates, 3);
        let (replay, l) = build(&obj, 3, CacheStrategy::SeedReplay, 3);
        assert_eq!(cached.full_zo_grad(), replay.full_zo_grad());
        let before = l.forward_passes();
        let a = cached.sample_estimate(&obj, 3, &l).unwrap();
        let b = replay.sample_estimate(&obj, 3, &l).unwrap();
        assert_eq!(a, b);
        assert_eq!(l.forward_passes() - before, 4);
    }

    #[test]
    fn full_batch_returns_full_grad_exactly() {
        let obj = Shifted { n: 7, d: 3 };
        for strategy in [CacheStrategy::CachedEstimates, CacheStrategy::SeedReplay] {
            let (c, l) = build(&obj, 2, strategy, 4);
            let batch =
                Minibatch::from_indices(vec![6, 2, 0, 5, 1, 4, 3], 7, SamplingMode::WithoutReplacement).unwrap();
            assert_eq!(&zo_minibatch_at_checkpoint(&c, &batch, &obj, &l).unwrap(), c.full_zo_grad());
        }
    }

    #[test]
    fn singleton_batch_returns_that_estimate() {
        let obj = Shifted { n: 5, d: 3 };
        let (c, l) = build(&obj, 1, CacheStrategy::CachedEstimates, 5);
        let batch = Minibatch::from_indices(vec![2], 5, SamplingMode::WithReplacement).unwrap();
        let got = zo_minibatch_at_checkpoint(&c, &batch, &obj, &l).unwrap();
        assert_eq!(&got, c.sample_estimate(&obj, 2, &l).unwrap().as_ref());
    }

    #[test]
    fn all_ordered_pairs_average_to_full_grad() {
        // Oracle: enumerate the 36 equally likely with-replacement batches.
        let obj = Shifted { n: 6, d: 4 };
        let (c, l) = build(&obj, 1, CacheStrategy::CachedEstimates, 6);
        let mut avg = ParamVector::zeros(4);
        for i in 0..6 {
            for j in 0..6 {
                let b = Minibatch::from_indices(vec![i, j], 6, SamplingMode::WithReplacement).unwrap();
                avg.add_assign(&zo_minibatch_at_checkpoint(&c, &b, &obj, &l).unwrap());
            }
        }
        avg.div_count(36);
        let rel = avg.sub(c.full_zo_grad()).norm() / c.full_zo_grad().norm();
        assert!(rel <= 1e-14, "{rel}");
    }

    #[test]
    fn out_of_range_batch_is_rejected() {
        let obj = Shifted { n: 3, d: 2 };
        let (c, l) = build(&obj, 1, CacheStrategy::CachedEstimates, 7);
        let bogus = Minibatch::from_indices(vec![5], 9, SamplingMode::WithReplacement).unwrap();
        assert!(zo_minibatch_at_checkpoint(&c, &bogus, &obj, &l).is_err());
    }

    #[test]
    fn evaluation_failure_aborts_construction() {
        let obj = crate::test_support::Blowup { dim: 2 };
        let mut rng = RngStream::new(0, Purpose::DirectionSampling);
        let err = build_checkpoint_cache(
            &obj,
            &ParamVector::zeros(2),
            Smoothing::new(0.1).unwrap(),
            1,
            CacheStrategy::CachedEstimates,
            &mut rng,
            &QueryLedger::new(),
        )
        .unwrap_err();
        assert!(matches!(err, VamoError::Evaluation { sample: 2, .. }));
    }

    #[test]
    fn construction_is_deterministic_despite_parallelism() {
        let obj = Quartic { dim: 6 };
        let x = ParamVector::from_vec(vec![0.5; 6]);
        let run = || {
            let mut rng = RngStream::new(9, Purpose::DirectionSampling);
            build_checkpoint_cache(
                &obj,
                &x,
                Smoothing::new(1e-2).unwrap(),
                4,
                CacheStrategy::CachedEstimates,
                &mut rng,
                &QueryLedger::new(),
            )
            .unwrap()
            .full_zo_grad()
            .clone()
        };
        assert_eq!(run(), run());
    }
}
