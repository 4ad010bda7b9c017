use vamo::optim::{
    fo_sgd_run, fo_svrg_run, predicted_queries, run_method, vamo_run, zo_sgd_run, CheckpointDirections,
    CheckpointEstimator, Method, OutputMode, RunTrace, VamoConfig,
};
use vamo::problems::{QuadraticProblem, Spectrum};
use vamo::zo::CacheStrategy;
use vamo::{Differentiable, Objective, ParamVector, QueryLedger, SamplingMode, VamoError};

fn quadratic(d: usize, n: usize, seed: u64) -> QuadraticProblem {
    QuadraticProblem::generate(d, n, Spectrum::Uniform { lo: 0.5, hi: 2.0 }, seed).unwrap()
}

fn iterates(trace: &RunTrace) -> &[ParamVector] {
    trace.iterates.as_deref().expect("run kept its iterates")
}

fn losses(trace: &RunTrace) -> Vec<f64> {
    trace.records.iter().map(|r| r.loss).collect()
}

struct Flat {
    dim: usize,
}

impl Objective for Flat {
    fn num_samples(&self) -> usize {
        4
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, i: usize, _x: &[f64]) -> f64 {
        i as f64 - 1.5
    }
    fn as_differentiable(&self) -> Option<&dyn Differentiable> {
        Some(self)
    }
}

impl Differentiable for Flat {
    fn gradient(&self, _i: usize, _x: &[f64]) -> ParamVector {
        ParamVector::zeros(self.dim)
    }
}

/// `f_i(x) = s_i · x` on the real line.
struct Slope;

impl Objective for Slope {
    fn num_samples(&self) -> usize {
        3
    }
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, i: usize, x: &[f64]) -> f64 {
        (i + 1) as f64 * x[0]
    }
}

#[test]
fn zero_alpha_reproduces_sgd_bitwise() {
    let quad = quadratic(10, 20, 3);
    let cfg = VamoConfig {
        epochs: 10,
        inner_steps: 20,
        batch_size: 4,
        alpha: 0.0,
        q: 3,
        master_seed: 42,
        keep_iterates: true,
        ..Default::default()
    }
    .with_step(0.05);
    let x0 = ParamVector::from_vec(vec![1.0; 10]);
    let a = vamo_run(&quad, &cfg, &x0, &QueryLedger::new()).unwrap();
    let b = fo_sgd_run(&quad, &cfg, &x0, &QueryLedger::new()).unwrap();
    assert_eq!(iterates(&a).len(), 201);
    assert_eq!(iterates(&a), iterates(&b));
    assert_eq!(losses(&a), losses(&b));
}

#[test]
fn exact_checkpoint_with_unit_alpha_is_svrg() {
    let quad = quadratic(6, 15, 4);
    let cfg = VamoConfig {
        epochs: 4,
        inner_steps: 12,
        batch_size: 3,
        alpha: 1.0,
        checkpoint_estimator: CheckpointEstimator::FirstOrder,
        master_seed: 9,
        keep_iterates: true,
        ..Default::default()
    }
    .with_step(0.1);
    let x0 = ParamVector::from_vec(vec![-0.5; 6]);
    let (la, lb) = (QueryLedger::new(), QueryLedger::new());
    let a = vamo_run(&quad, &cfg, &x0, &la).unwrap();
    let b = fo_svrg_run(&quad, &cfg, &x0, &lb).unwrap();
    assert_eq!(iterates(&a), iterates(&b));
    assert_eq!(la.snapshot(), lb.snapshot());
}

#[test]
fn cache_strategies_give_identical_trajectories() {
    let quad = quadratic(8, 12, 5);
    let base = VamoConfig {
        epochs: 3,
        inner_steps: 10,
        batch_size: 2,
        alpha: 0.3,
        q: 2,
        master_seed: 1,
        keep_iterates: true,
        ..Default::default()
    }
    .with_step(0.05);
    let replay = VamoConfig { cache_strategy: CacheStrategy::SeedReplay, ..base.clone() };
    let x0 = ParamVector::from_vec(vec![0.7; 8]);
    let (lc, lr) = (QueryLedger::new(), QueryLedger::new());
    let a = vamo_run(&quad, &base, &x0, &lc).unwrap();
    let b = vamo_run(&quad, &replay, &x0, &lr).unwrap();
    assert_eq!(iterates(&a), iterates(&b));
    // Replay pays for the recomputation.
    assert!(lr.forward_passes() > lc.forward_passes());
}

#[test]
fn repeated_runs_are_deterministic() {
    let quad = quadratic(5, 10, 6);
    let cfg = VamoConfig {
        epochs: 2,
        inner_steps: 15,
        batch_size: 2,
        alpha: 0.2,
        q: 2,
        keep_iterates: true,
        ..Default::default()
    }
    .with_step(0.05);
    let x0 = ParamVector::from_vec(vec![1.0; 5]);
    for method in Method::ALL {
        let a = run_method(method, &quad, &cfg, &x0, &QueryLedger::new()).unwrap();
        let b = run_method(method, &quad, &cfg, &x0, &QueryLedger::new()).unwrap();
        assert_eq!(iterates(&a), iterates(&b), "{}", method.name());
    }
}

#[test]
fn every_method_descends_on_a_quadratic() {
    let quad = quadratic(5, 10, 7);
    let cfg = VamoConfig { epochs: 5, inner_steps: 20, batch_size: 2, alpha: 0.2, q: 5, ..Default::default() }
        .with_step(0.05);
    let x0 = ParamVector::from_vec(vec![2.0; 5]);
    for method in Method::ALL {
        let t = run_method(method, &quad, &cfg, &x0, &QueryLedger::new()).unwrap();
        assert!(t.final_loss() < 0.5 * t.records[0].loss, "{}: {:?}", method.name(), losses(&t));
    }
}

#[test]
fn full_batch_sgd_is_monotone() {
    let quad = quadratic(6, 8, 8);
    let l = quad.smoothness().unwrap();
    let cfg = VamoConfig {
        epochs: 1,
        inner_steps: 60,
        batch_size: 8,
        sampling: SamplingMode::WithoutReplacement,
        ..Default::default()
    }
    .with_step(1.0 / (2.0 * l));
    let x0 = ParamVector::from_vec(vec![3.0; 6]);
    let t = fo_sgd_run(&quad, &cfg, &x0, &QueryLedger::new()).unwrap();
    for w in t.records.windows(2) {
        assert!(w[1].loss <= w[0].loss, "{} then {}", w[0].loss, w[1].loss);
    }
}

#[test]
fn flat_objective_never_moves() {
    let cfg = VamoConfig {
        epochs: 2,
        inner_steps: 5,
        batch_size: 2,
        alpha: 0.5,
        q: 2,
        keep_iterates: true,
        ..Default::default()
    };
    let x0 = ParamVector::from_vec(vec![0.25, -1.0, 4.0]);
    for method in Method::ALL {
        let t = run_method(method, &Flat { dim: 3 }, &cfg, &x0, &QueryLedger::new()).unwrap();
        assert!(iterates(&t).iter().all(|x| *x == x0), "{}", method.name());
        assert_eq!(t.final_loss(), 0.0);
    }
}

#[test]
fn one_dimensional_zo_sgd_is_gradient_descent() {
    // On the line every direction is ±1, so each estimate is the exact slope
    // up to rounding.
    let cfg = VamoConfig {
        epochs: 1,
        inner_steps: 50,
        batch_size: 3,
        sampling: SamplingMode::WithoutReplacement,
        ..Default::default()
    }
    .with_step(0.01);
    let t = zo_sgd_run(&Slope, &cfg, &ParamVector::from_vec(vec![1.0]), &QueryLedger::new()).unwrap();
    let expected = 1.0 - 50.0 * 0.01 * 2.0;
    assert!((t.final_point[0] - expected).abs() < 1e-9, "{}", t.final_point[0]);
}

#[test]
fn ledger_matches_closed_forms_for_every_method() {
    let quad = quadratic(4, 9, 9);
    let x0 = ParamVector::from_vec(vec![0.5; 4]);
    let variants = [
        VamoConfig::default(),
        VamoConfig { epochs: 3, inner_steps: 7, batch_size: 4, q: 3, ..Default::default() },
        VamoConfig {
            epochs: 2,
            inner_steps: 5,
            batch_size: 2,
            q: 2,
            cache_strategy: CacheStrategy::SeedReplay,
            ..Default::default()
        },
        VamoConfig {
            epochs: 2,
            inner_steps: 5,
            batch_size: 3,
            q: 1,
            checkpoint_directions: CheckpointDirections::Fresh,
            ..Default::default()
        },
        VamoConfig {
            epochs: 2,
            inner_steps: 4,
            batch_size: 3,
            checkpoint_estimator: CheckpointEstimator::FirstOrder,
            ..Default::default()
        },
    ];
    for cfg in variants {
        for method in Method::ALL {
            let ledger = QueryLedger::new();
            let t = run_method(method, &quad, &cfg, &x0, &ledger).unwrap();
            let (fwd, bwd) = predicted_queries(method, &cfg, quad.num_samples());
            assert_eq!((ledger.forward_passes(), ledger.backward_passes()), (fwd, bwd), "{} {cfg:?}", method.name());
            let last = t.records.last().unwrap();
            assert_eq!((last.fwd_queries, last.bwd_queries), (fwd, bwd));
        }
    }
}

#[test]
fn records_are_labelled_by_epoch_and_step() {
    let quad = quadratic(3, 5, 10);
    let cfg = VamoConfig { epochs: 3, inner_steps: 4, record_every: 3, ..Default::default() };
    let t = vamo_run(&quad, &cfg, &ParamVector::zeros(3), &QueryLedger::new()).unwrap();
    let labels: Vec<_> = t.records.iter().map(|r| (r.epoch, r.inner_step, r.global_step)).collect();
    assert_eq!(labels, vec![(0, 0, 0), (1, 3, 3), (2, 2, 6), (3, 1, 9), (3, 4, 12)]);
    assert!(t.records[0].grad_norm_sq > 0.0);
}

#[test]
fn uniform_output_returns_a_kept_iterate() {
    let quad = quadratic(3, 5, 11);
    let cfg = VamoConfig {
        epochs: 2,
        inner_steps: 10,
        output_mode: OutputMode::UniformRandomIterate,
        keep_iterates: true,
        master_seed: 5,
        ..Default::default()
    };
    let t = vamo_run(&quad, &cfg, &ParamVector::from_vec(vec![1.0; 3]), &QueryLedger::new()).unwrap();
    let k = t.output_index.unwrap();
    assert!(k < cfg.total_steps());
    assert_eq!(t.output_point, iterates(&t)[k]);
}

#[test]
fn huge_steps_abort_with_partial_trace() {
    let quad = quadratic(4, 6, 12);
    let cfg = VamoConfig { epochs: 10, inner_steps: 50, ..Default::default() }.with_step(50.0);
    match fo_sgd_run(&quad, &cfg, &ParamVector::from_vec(vec![1.0; 4]), &QueryLedger::new()) {
        Err(VamoError::Divergence { step, trace }) => {
            assert!(step > 0 && step < 500);
            assert_eq!(trace.records.len(), step);
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn gradient_methods_refuse_value_only_objectives() {
    let cfg = VamoConfig::default();
    let x0 = ParamVector::zeros(1);
    for method in Method::ALL {
        let r = run_method(method, &Slope, &cfg, &x0, &QueryLedger::new());
        assert_eq!(r.is_err(), method.needs_gradients(), "{}", method.name());
    }
}
