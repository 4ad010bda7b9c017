use nalgebra::DMatrix;

use vamo::data::synth_digits;
use vamo::problems::{MlpClassifier, NonconvexLeastSquares, QuadraticProblem, Spectrum};
use vamo::verify::{check_gradient_self_check, random_probes, GRADIENT_STEP, PIECEWISE_TOLERANCE, SMOOTH_TOLERANCE};
use vamo::{check_gradient, Differentiable, Objective, ParamVector, Purpose, RngStream};

fn top_eigenvalue(h: &[f64], d: usize) -> f64 {
    let m = DMatrix::from_row_slice(d, d, h);
    m.symmetric_eigen().eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

#[test]
fn smoothness_matches_an_eigen_solver() {
    for seed in 0..5 {
        let p = QuadraticProblem::generate(10, 4, Spectrum::Uniform { lo: 0.1, hi: 5.0 }, seed).unwrap();
        let oracle = (0..4).map(|i| top_eigenvalue(p.hessian(i), 10)).fold(0.0, f64::max);
        assert!((p.smoothness().unwrap() - oracle).abs() <= 1e-12, "seed {seed}");
        assert!((oracle - 5.0).abs() <= 1e-12);
    }
}

#[test]
fn explicit_hessians_get_their_spectral_norm() {
    let h = vec![2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, -4.5];
    let p = QuadraticProblem::from_parts(vec![h.clone()], vec![ParamVector::zeros(3)], vec![0.0]).unwrap();
    assert!((p.smoothness().unwrap() - top_eigenvalue(&h, 3)).abs() <= 1e-12);
    assert!((p.smoothness().unwrap() - 4.5).abs() <= 1e-12);
}

#[test]
fn variance_is_the_spread_of_component_gradients() {
    let p = QuadraticProblem::generate(4, 7, Spectrum::Uniform { lo: 0.5, hi: 2.0 }, 3).unwrap();
    let x = [0.2, -0.3, 1.0, 0.5];
    let grads: Vec<ParamVector> = (0..7).map(|i| p.gradient(i, &x)).collect();
    let mean: Vec<f64> = (0..4).map(|j| grads.iter().map(|g| g[j]).sum::<f64>() / 7.0).collect();
    let want = grads.iter().map(|g| g.dist_sq(&mean)).sum::<f64>() / 7.0;
    assert!((p.sigma_sq_at(&x) - want).abs() <= 1e-12 * want);
}

#[test]
fn quadratic_gradients_pass_the_smooth_gate() {
    let p = QuadraticProblem::generate(10, 5, Spectrum::Uniform { lo: 0.1, hi: 5.0 }, 1).unwrap();
    let mut rng = RngStream::new(1, Purpose::DataGeneration);
    let probes = random_probes(5, &ParamVector::zeros(10), 1.0, 20, &mut rng);
    assert!(check_gradient(&p, &probes, GRADIENT_STEP).passes(SMOOTH_TOLERANCE));
}

#[test]
fn least_squares_gradients_pass_the_smooth_gate() {
    let p = NonconvexLeastSquares::generate(1000, 100, 2).unwrap();
    let mut rng = RngStream::new(2, Purpose::DataGeneration);
    let probes = random_probes(1000, &p.initial_point(2), 0.5, 20, &mut rng);
    let c = check_gradient(&p, &probes, GRADIENT_STEP);
    assert!(c.passes(SMOOTH_TOLERANCE), "{c:?}");
    assert_eq!(c.probes_checked, 20);
}

#[test]
fn mlp_gradients_pass_the_piecewise_gate() {
    let digits = synth_digits(200, 8, 10, 3).unwrap();
    let mlp = MlpClassifier::new(&digits, 10).unwrap();
    assert_eq!(mlp.dim(), 2778);
    let mut rng = RngStream::new(3, Purpose::DataGeneration);
    let probes = random_probes(200, &mlp.glorot_init(3), 0.05, 20, &mut rng);
    let c = check_gradient(&mlp, &probes, GRADIENT_STEP);
    assert!(c.passes(PIECEWISE_TOLERANCE), "{c:?}");
}

#[test]
fn self_check_reports_every_problem() {
    let reports = check_gradient_self_check(20, 7, false).unwrap();
    assert_eq!(reports.len(), 3);
    assert!(reports.iter().all(|r| r.pass), "{reports:?}");
    let skewed = check_gradient_self_check(20, 7, true).unwrap();
    assert!(skewed.iter().all(|r| !r.pass));
}

#[test]
fn evaluations_are_pure() {
    let p = NonconvexLeastSquares::generate(50, 100, 4).unwrap();
    let x = p.initial_point(4);
    for i in [0, 17, 49] {
        assert_eq!(p.value(i, &x).to_bits(), p.value(i, &x).to_bits());
        assert_eq!(p.gradient(i, &x), p.gradient(i, &x));
    }
}
