//! Functional gradient ascent: one fitted basis per action per stage.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rng::hash_key;
use crate::scalar::Scalar;

use super::fit::{fit_linear, LinearBasis, DEFAULT_RIDGE};
use super::policy::{HiddenUnit, PolicyModel};

/// A visited state with the quantities every gradient provider needs.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSample<S> {
    pub features: Vec<S>,
    /// Index of the action taken, into the model's heads.
    pub action: usize,
    pub psi: Vec<S>,
    pub probs: Vec<S>,
    pub q: S,
}

impl<S: Scalar> GradientSample<S> {
    pub fn new(model: &PolicyModel<S>, features: Vec<S>, action: usize, q: S) -> Self {
        let psi = model.psi(&features);
        let probs = super::policy::softmax(&psi);
        GradientSample {
            features,
            action,
            psi,
            probs,
            q,
        }
    }

    pub fn indicator(&self, a: usize) -> S {
        if a == self.action {
            S::one()
        } else {
            S::zero()
        }
    }
}

/// `(I - pi) Q`.
pub fn base_gradient<S: Scalar>(sample: &GradientSample<S>, a: usize) -> S {
    (sample.indicator(a) - sample.probs[a]) * sample.q
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostConfig {
    pub eta: f64,
    pub subsample: f64,
    pub ridge: f64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            eta: 0.5,
            subsample: 0.7,
            ridge: DEFAULT_RIDGE,
        }
    }
}

impl BoostConfig {
    /// `eta / sqrt(k)` for the 1-based stage `k`.
    pub fn step(&self, stage: usize) -> f64 {
        self.eta / (stage.max(1) as f64).sqrt()
    }
}

/// Indices of a fresh subsample, at least two when possible.
pub fn subsample_indices(n: usize, fraction: f64, key: &[u64]) -> Vec<usize> {
    let want = ((n as f64 * fraction).round() as usize).clamp(n.min(2), n);
    let mut rng = ChaCha8Rng::seed_from_u64(hash_key(key));
    let mut idx = index::sample(&mut rng, n, want).into_vec();
    idx.sort_unstable();
    idx
}

/// Fits `gradient_fn(sample index, sample, action)` for action `a` on a
/// subsample drawn with `key`.
pub fn fit_basis<S, F>(samples: &[GradientSample<S>], a: usize, gradient_fn: &F, cfg: &BoostConfig, key: &[u64]) -> LinearBasis<S>
where
    S: Scalar,
    F: Fn(usize, &GradientSample<S>, usize) -> S,
{
    let idx = subsample_indices(samples.len(), cfg.subsample, key);
    let xs: Vec<&[S]> = idx.iter().map(|&i| samples[i].features.as_slice()).collect();
    let ys: Vec<S> = idx.iter().map(|&i| gradient_fn(i, &samples[i], a)).collect();
    fit_linear(&xs, &ys, S::lit(cfg.ridge))
}

/// One boosting stage. Returns false, leaving the model untouched, when
/// every fitted basis is zero.
pub fn boost<S, F>(model: &mut PolicyModel<S>, samples: &[GradientSample<S>], gradient_fn: F, cfg: &BoostConfig, seed: u64) -> bool
where
    S: Scalar,
    F: Fn(usize, &GradientSample<S>, usize) -> S,
{
    if samples.is_empty() {
        return false;
    }
    let stage = model.stages + 1;
    let step = S::lit(cfg.step(stage));
    let bases: Vec<LinearBasis<S>> = (0..model.n_actions())
        .map(|a| fit_basis(samples, a, &gradient_fn, cfg, &[seed, stage as u64, a as u64]))
        .collect();
    if bases.iter().all(LinearBasis::is_zero) {
        return false;
    }
    for (head, basis) in model.heads.iter_mut().zip(bases) {
        if !basis.is_zero() {
            head.units.push(HiddenUnit {
                basis,
                step,
                output: S::one(),
            });
        }
    }
    model.stages = stage;
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Action;

    fn bandit() -> (PolicyModel<f64>, Vec<GradientSample<f64>>) {
        let model = PolicyModel::new(&[Action::lock_shop(0), Action::NIL], 1);
        let samples = (0..10)
            .map(|i| {
                let a = i % 2;
                let q = if a == 0 { 1.0 } else { 0.0 };
                GradientSample::new(&model, vec![(i % 3) as f64], a, q)
            })
            .collect();
        (model, samples)
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let (mut model, samples) = bandit();
        let before = model.clone();
        assert!(!boost(&mut model, &samples, |_, _, _| 0.0, &BoostConfig::default(), 1));
        assert_eq!(model, before);
    }

    #[test]
    fn rewarded_arm_gains_probability() {
        let (mut model, samples) = bandit();
        let p0 = model.policy_prob(&[1.0])[0];
        assert!(boost(&mut model, &samples, |_, s, a| base_gradient(s, a), &BoostConfig::default(), 1));
        assert!(model.policy_prob(&[1.0])[0] > p0);
        assert_eq!(model.stages, 1);
    }

    #[test]
    fn psi_is_the_sum_of_stored_bases() {
        let (mut model, samples) = bandit();
        let cfg = BoostConfig::default();
        for k in 0..5 {
            boost(&mut model, &samples, |_, s, a| base_gradient(s, a) + 0.1 * k as f64, &cfg, 3);
        }
        for x in [0.0, 0.5, 2.0] {
            for a in 0..2 {
                let head = &model.heads[a];
                let direct = head.units.iter().map(|u| u.step * u.basis.eval(&[x])).sum::<f64>();
                assert!((model.psi_action(a, &[x]) - direct).abs() <= 1e-10);
            }
        }
        assert_eq!(model.heads[0].units[2].step, 0.5 / 3f64.sqrt());
    }

    #[test]
    fn subsample_is_seeded() {
        let a = subsample_indices(20, 0.7, &[1, 2]);
        assert_eq!(a.len(), 14);
        assert_eq!(a, subsample_indices(20, 0.7, &[1, 2]));
        assert_ne!(a, subsample_indices(20, 0.7, &[1, 3]));
        assert_eq!(subsample_indices(2, 0.7, &[0]).len(), 2);
    }
}
