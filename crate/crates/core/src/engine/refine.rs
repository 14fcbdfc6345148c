//! Backpropagation through the two-layer view of a boosted model.
//!
//! Parameters are flattened head by head, unit by unit, as
//! `weights.., intercept, output`. Boosting steps and psi0 stay fixed.

use crate::scalar::Scalar;

use super::boost::GradientSample;
use super::policy::{log_softmax, softmax, Activation, PolicyModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineConfig {
    pub learning_rate: f64,
    pub beta: f64,
    pub max_halvings: usize,
    pub tolerance: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            learning_rate: 0.01,
            beta: super::policy::DEFAULT_BETA,
            max_halvings: 10,
            tolerance: 1e-6,
        }
    }
}

/// `sum_i Q_i log pi(x_i, a_i)`.
pub fn refinement_objective<S: Scalar>(model: &PolicyModel<S>, samples: &[GradientSample<S>]) -> S {
    samples
        .iter()
        .map(|s| s.q * log_softmax(&model.psi(&s.features))[s.action])
        .sum()
}

pub fn parameters<S: Scalar>(model: &PolicyModel<S>) -> Vec<S> {
    let mut out = Vec::new();
    for head in &model.heads {
        for u in &head.units {
            out.extend_from_slice(&u.basis.weights);
            out.push(u.basis.intercept);
            out.push(u.output);
        }
    }
    out
}

pub fn set_parameters<S: Scalar>(model: &mut PolicyModel<S>, params: &[S]) {
    let mut it = params.iter().copied();
    for head in &mut model.heads {
        for u in &mut head.units {
            for w in &mut u.basis.weights {
                *w = it.next().expect("parameter vector too short");
            }
            u.basis.intercept = it.next().expect("parameter vector too short");
            u.output = it.next().expect("parameter vector too short");
        }
    }
    assert!(it.next().is_none(), "parameter vector too long");
}

/// Analytic gradient of `refinement_objective`, in `parameters` order.
pub fn refinement_gradient<S: Scalar>(model: &PolicyModel<S>, samples: &[GradientSample<S>]) -> Vec<S> {
    let act = model.activation;
    let mut grad = vec![S::zero(); parameters(model).len()];
    for s in samples {
        let probs = softmax(&model.psi(&s.features));
        let mut offset = 0;
        for (a, head) in model.heads.iter().enumerate() {
            let indicator = if a == s.action { S::one() } else { S::zero() };
            let dpsi = s.q * (indicator - probs[a]);
            for u in &head.units {
                let z = u.basis.eval(&s.features);
                let upstream = dpsi * u.output * u.step * act.derivative(z);
                for (k, &x) in s.features.iter().enumerate() {
                    grad[offset + k] = grad[offset + k] + upstream * x;
                }
                let d = s.features.len();
                grad[offset + d] = grad[offset + d] + upstream;
                grad[offset + d + 1] = grad[offset + d + 1] + dpsi * u.step * act.apply(z);
                offset += d + 2;
            }
        }
    }
    grad
}

/// Full-batch gradient ascent with softplus hidden units. A step that
/// lowers the objective is retried at half the rate; after
/// `max_halvings` failures the run stops at the last accepted point.
pub fn refine_network<S: Scalar>(model: &PolicyModel<S>, samples: &[GradientSample<S>], epochs: usize, cfg: &RefineConfig) -> PolicyModel<S> {
    let mut model = model.clone();
    if epochs == 0 || model.n_units() == 0 || samples.is_empty() {
        return model;
    }
    model.activation = Activation::Softplus { beta: cfg.beta };
    let mut lr = S::lit(cfg.learning_rate);
    let tol = S::lit(cfg.tolerance);
    let mut params = parameters(&model);
    let mut value = refinement_objective(&model, samples);
    'epochs: for _ in 0..epochs {
        let grad = refinement_gradient(&model, samples);
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<S> = params.iter().zip(&grad).map(|(&p, &g)| p + lr * g).collect();
            set_parameters(&mut model, &trial);
            let trial_value = refinement_objective(&model, samples);
            if trial_value.is_finite() && trial_value >= value - tol {
                params = trial;
                value = trial_value;
                continue 'epochs;
            }
            lr = lr / S::lit(2.0);
        }
        set_parameters(&mut model, &params);
        break;
    }
    model
}
