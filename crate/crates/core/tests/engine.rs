use kipg_core::engine::{
    boost, estimate_q, fit_linear, read_model, write_model, BoostConfig, GradientSample, PolicyModel, base_gradient,
};
use kipg_core::sim::Action;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Least squares with an intercept column, solved by SVD.
fn reference_fit(xs: &[Vec<f64>], ys: &[f64]) -> (Vec<f64>, f64) {
    let d = xs[0].len();
    let a = DMatrix::from_fn(xs.len(), d + 1, |i, j| if j == d { 1.0 } else { xs[i][j] });
    let b = DVector::from_column_slice(ys);
    let sol = a.svd(true, true).solve(&b, 1e-12).unwrap();
    (sol.as_slice()[..d].to_vec(), sol[d])
}

#[test]
fn fit_matches_svd_least_squares() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.gen_range(8..40);
        let d = rng.gen_range(1..6);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(0.0..3.0)).collect()).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let refs: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
        let fit = fit_linear(&refs, &ys, 1e-6);
        let (w, b) = reference_fit(&xs, &ys);
        for (got, want) in fit.weights.iter().zip(&w) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
        assert!((fit.intercept - b).abs() < 1e-8);
    }
}

fn samples(model: &PolicyModel<f64>, seed: u64) -> Vec<GradientSample<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..60)
        .map(|_| {
            let x = vec![rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)];
            // Action 0 pays off when the first feature is large.
            let a = rng.gen_range(0..2);
            let q = if (a == 0) == (x[0] > 1.0) { 0.0 } else { -1.0 };
            GradientSample::new(model, x, a, q)
        })
        .collect()
}

#[test]
fn boosting_learns_a_separable_preference_and_replays() {
    let actions = [Action::lock_shop(0), Action::unlock_shop(0)];
    let run = || {
        let mut model = PolicyModel::<f64>::new(&actions, 2);
        for k in 0..15 {
            let s = samples(&model, k);
            boost(&mut model, &s, |_, s, a| base_gradient(s, a), &BoostConfig::default(), 3);
        }
        model
    };
    let model = run();
    assert_eq!(model, run());
    assert_eq!(model.stages, 15);
    assert_eq!(model.greedy(&[1.8, 1.0]), 0);
    assert_eq!(model.greedy(&[0.2, 1.0]), 1);
}

#[test]
fn zero_returns_skip_the_stage() {
    let actions = [Action::lock_shop(0), Action::unlock_shop(0)];
    let mut model = PolicyModel::<f64>::new(&actions, 2);
    let s: Vec<_> = samples(&model, 1).into_iter().map(|mut s| { s.q = 0.0; s }).collect();
    assert!(!boost(&mut model, &s, |_, s, a| base_gradient(s, a), &BoostConfig::default(), 3));
    assert_eq!(model.stages, 0);
    assert_eq!(model.n_units(), 0);
}

#[test]
fn trained_model_text_round_trip() {
    let actions = [Action::lock_shop(0), Action::unlock_shop(0)];
    let mut model = PolicyModel::<f64>::new(&actions, 2);
    model.feature_labels = vec![(1, "sopen(State,Shop)".into()), (7, "hospitalized(State,Person)".into())];
    for k in 0..4 {
        let s = samples(&model, k);
        boost(&mut model, &s, |_, s, a| base_gradient(s, a), &BoostConfig::default(), 9);
    }
    let text = write_model(&model);
    let back: PolicyModel<f64> = read_model(&text).unwrap();
    assert_eq!(back, model);
    assert_eq!(write_model(&back), text);
}

#[test]
fn returns_to_go() {
    let q: Vec<f64> = estimate_q(&[0.0, -1.0, -1.0], 0.9);
    assert!((q[0] + 1.71).abs() < 1e-12);
    assert_eq!(q[2], -1.0);
    assert!(estimate_q::<f64>(&[0.0; 5], 0.9).iter().all(|&v| v == 0.0));
}
