use ojak::analysis::w_matrix;
use ojak::linalg::{gram_schmidt_qr, spectral_norm, subspace_distance, DenseMatrix};
use ojak::oja::{
    gaussian_init, phase1_length_real, run, run_observed, ConstantProfile, OrthoPolicy, StepObserver, StepSchedule,
    StepView, PHASE1_S,
};
use ojak::streams::{make_bounded_noise_model, make_finite_support, SpectralModel};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

fn projector_gap(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    spectral_norm(&a.matmul_t(a).sub(&b.matmul_t(b)))
}

fn deterministic(diag: &[f64], k: usize) -> ojak::streams::SampleDistribution {
    make_finite_support(vec![DenseMatrix::from_diag(diag)], vec![1.0], k).unwrap()
}

/// Distance to e₁ after every step.
struct DistLog(Vec<f64>);

impl StepObserver for DistLog {
    fn on_step(&mut self, view: &StepView<'_>) {
        let q = gram_schmidt_qr(view.frame).unwrap();
        self.0
            .push(subspace_distance(&q, &DenseMatrix::eye(q.rows(), 1)).unwrap());
    }
}

#[test]
fn power_iteration_converges_on_diag_5_1() {
    let dist = deterministic(&[5.0, 1.0], 1);
    let sched = StepSchedule::constant(0.1, 200, 4.0).unwrap();
    let z0 = DenseMatrix::from_columns(&[vec![0.3, 1.0]]).unwrap();
    let (q, trace) = run(&dist, &sched, 200, &z0, 0, &mut []).unwrap();
    assert!(subspace_distance(&q, &DenseMatrix::eye(2, 1)).unwrap() < 1e-8);
    assert_eq!(trace.rows.len(), 201);
}

#[test]
fn decay_ratio_matches_closed_form() {
    let eta = 0.05;
    let dist = deterministic(&[5.0, 1.0, 0.0], 1);
    let sched = StepSchedule::constant(eta, 1000, 4.0).unwrap();
    let z0 = DenseMatrix::from_columns(&[vec![1.0, 0.7, -0.4]]).unwrap();
    let mut log = DistLog(Vec::new());
    run_observed(&dist, &sched, 120, &z0, 0, OrthoPolicy::EveryStep, &mut [&mut log]).unwrap();
    let target = (1.0 + eta) / (1.0 + 5.0 * eta);
    // sin θ_t = x/√(1+x²) with x = tan θ_t; late ratios of tan θ are exact
    let tan = |s: f64| s / (1.0 - s * s).sqrt();
    let ratio = tan(log.0[119]) / tan(log.0[118]);
    assert!((ratio - target).abs() < 1e-6, "{ratio} vs {target}");
}

#[test]
fn single_noiseless_step_is_power_step() {
    let m = DenseMatrix::from_diag(&[3.0, 1.0, 0.5]);
    let dist = make_finite_support(vec![m.clone()], vec![1.0], 2).unwrap();
    let sched = StepSchedule::constant(0.2, 5, 2.0).unwrap();
    let z0 = gaussian(3, 2, 4);
    let (q, _) = run(&dist, &sched, 1, &z0, 0, &mut []).unwrap();
    let expected = gram_schmidt_qr(&z0.add(&m.matmul(&z0).scale(0.2))).unwrap();
    assert!(projector_gap(&q, &expected) < 1e-14);
}

#[test]
fn same_seed_same_trace() {
    let dist = make_bounded_noise_model(&[2.0, 1.0, 0.5, 0.2, 0.0], 2, 0.5, 2, 5, 3).unwrap();
    let sched = StepSchedule::phase2_only(8.0, 50.0, dist.model().rho_k).unwrap();
    let z0 = gaussian_init(5, 2, 8).unwrap();
    let a = run(&dist, &sched, 300, &z0, 77, &mut []).unwrap();
    let b = run(&dist, &sched, 300, &z0, 77, &mut []).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1.to_csv(), b.1.to_csv());
    let c = run(&dist, &sched, 300, &z0, 78, &mut []).unwrap();
    assert_ne!(a.1.to_csv(), c.1.to_csv());
}

#[test]
fn gaussian_init_entries_are_centered() {
    let z = gaussian_init(1000, 100, 42).unwrap();
    let n = 100_000.0_f64;
    let mean = z.as_slice().iter().sum::<f64>() / n;
    let var = z.as_slice().iter().map(|v| v * v).sum::<f64>() / n;
    assert!(mean.abs() < 3.0 / n.sqrt(), "mean {mean}");
    assert!((var - 1.0).abs() < 3.0 * (2.0 / n).sqrt(), "var {var}");
}

#[test]
fn theoretical_t0_scales_inverse_square_in_delta() {
    let m = SpectralModel::from_mean(DenseMatrix::from_diag(&[2.0, 1.0, 0.0, 0.0]), 1, 1.0, 1.0).unwrap();
    assert_eq!(m.rho_bar(), 0.5);
    let unit = SpectralModel::from_mean(DenseMatrix::from_diag(&[1.0, 0.0, 0.0]), 1, 1.0, 1.0).unwrap();
    assert_eq!(unit.rho_bar(), 1.0);
    let profile = ConstantProfile::theoretical();
    let d = 4;
    let log_term = |delta: f64| (12.0 * std::f64::consts::E * d as f64 / (delta * m.rho_bar() * PHASE1_S)).ln();
    for delta in [0.01, 0.05, 0.2] {
        let ratio = phase1_length_real(&m, d, delta, &profile) / phase1_length_real(&m, d, 2.0 * delta, &profile);
        let oracle = 4.0 * (log_term(delta) / log_term(2.0 * delta)).powi(4);
        assert!((ratio / oracle - 1.0).abs() < 1e-12);
        assert!(ratio > 4.0);
    }
}

#[test]
fn rank_deficient_start_is_rejected() {
    let dist = deterministic(&[2.0, 1.0, 0.0], 1);
    let sched = StepSchedule::constant(0.1, 5, 1.0).unwrap();
    let z0 = DenseMatrix::zeros(3, 1);
    assert!(matches!(
        run(&dist, &sched, 3, &z0, 0, &mut []),
        Err(ojak::oja::OjaError::Linalg { step: 0, .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn deferred_orthonormalization_is_equivalent(d in 3usize..17, kk in 1usize..4, steps in 1usize..51, seed in any::<u64>()) {
        let k = kk.min(d - 1);
        let eigs: Vec<f64> = (0..d).map(|i| 1.0 - i as f64 / d as f64).collect();
        let dist = make_bounded_noise_model(&eigs, k, 0.5, 2.min(d), d, seed % 1000).unwrap();
        let sched = StepSchedule::constant(0.05, steps, dist.model().rho_k).unwrap();
        let z0 = gaussian_init(d, k, seed).unwrap();
        let every = run_observed(&dist, &sched, steps, &z0, seed, OrthoPolicy::EveryStep, &mut []).unwrap();
        let deferred = run_observed(&dist, &sched, steps, &z0, seed, OrthoPolicy::Deferred, &mut []).unwrap();
        let periodic = run_observed(&dist, &sched, steps, &z0, seed, OrthoPolicy::Every(7), &mut []).unwrap();
        prop_assert!(projector_gap(&every, &deferred) <= 1e-8);
        prop_assert!(projector_gap(&every, &periodic) <= 1e-8);
    }

    #[test]
    fn iterate_span_is_scale_invariant(c in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0], seed in any::<u64>()) {
        let dist = make_bounded_noise_model(&[2.0, 1.5, 0.5, 0.0, -0.5], 2, 0.7, 2, 5, 1).unwrap();
        let sched = StepSchedule::constant(0.05, 40, dist.model().rho_k).unwrap();
        let z0 = gaussian_init(5, 2, seed).unwrap();
        let a = run_observed(&dist, &sched, 40, &z0, seed, OrthoPolicy::EveryStep, &mut []).unwrap();
        let b = run_observed(&dist, &sched, 40, &z0.scale(c), seed, OrthoPolicy::EveryStep, &mut []).unwrap();
        prop_assert!(projector_gap(&a, &b) <= 1e-10);
    }

    #[test]
    fn w_is_invariant_under_right_multiplication(d in 3usize..10, kk in 1usize..4, seed in any::<u64>()) {
        let k = kk.min(d - 1);
        let eigs: Vec<f64> = (0..d).map(|i| (d - i) as f64).collect();
        let model = SpectralModel::from_mean(DenseMatrix::from_diag(&eigs), k, 0.0, 0.0).unwrap();
        let z = gaussian(d, k, seed);
        let r = gaussian(k, k, seed ^ 99).add(&DenseMatrix::identity(k).scale(2.0));
        let (Ok(w), Ok(wr)) = (w_matrix(&z, &model.v, &model.u), w_matrix(&z.matmul(&r), &model.v, &model.u)) else {
            return Ok(());
        };
        prop_assert!(w.sub(&wr).max_abs() <= 1e-10 * w.max_abs().max(1.0));
    }

    #[test]
    fn phase2_steps_decrease(alpha in 1.0f64..20.0, beta in 0.5f64..1e4, rho in 0.01f64..10.0, t0 in 0usize..50) {
        let s = StepSchedule::new(t0, 0.3, alpha, beta, rho).unwrap();
        for t in t0 + 1..t0 + 40 {
            prop_assert!(s.eta(t + 1) < s.eta(t));
        }
        prop_assert_eq!(s.eta(t0 + 1), alpha / ((beta + 1.0) * rho));
    }
}
