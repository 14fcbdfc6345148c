//! Boltzmann policy over per-action sums of basis functions.

use crate::rng;
use crate::scalar::Scalar;
use crate::sim::Action;

use super::fit::LinearBasis;

/// Hidden-layer nonlinearity. Boosting builds an additive model, which is
/// the `Linear` case; refinement switches to softplus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Linear,
    Softplus { beta: f64 },
}

pub const DEFAULT_BETA: f64 = 1.0;

/// `(1/beta) ln(1 + e^(beta x))`, evaluated without overflow.
pub fn softplus<S: Scalar>(x: S, beta: S) -> S {
    let z = beta * x;
    let tail = (-z.abs()).exp().ln_1p();
    (z.max(S::zero()) + tail) / beta
}

/// Derivative of softplus in `x`: the logistic function of `beta x`.
pub fn logistic<S: Scalar>(z: S) -> S {
    if z >= S::zero() {
        S::one() / (S::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (S::one() + e)
    }
}

impl Activation {
    pub fn apply<S: Scalar>(self, z: S) -> S {
        match self {
            Activation::Linear => z,
            Activation::Softplus { beta } => softplus(z, S::lit(beta)),
        }
    }

    pub fn derivative<S: Scalar>(self, z: S) -> S {
        match self {
            Activation::Linear => S::one(),
            Activation::Softplus { beta } => logistic(S::lit(beta) * z),
        }
    }
}

/// One basis function with its boosting step and output-layer weight.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenUnit<S> {
    pub basis: LinearBasis<S>,
    pub step: S,
    pub output: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionHead<S> {
    pub action: Action,
    pub psi0: S,
    pub units: Vec<HiddenUnit<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyModel<S> {
    pub n_features: usize,
    /// Optional `(clause id, clause text)` per input, for reporting.
    pub feature_labels: Vec<(usize, String)>,
    pub heads: Vec<ActionHead<S>>,
    pub activation: Activation,
    pub stages: usize,
}

impl<S: Scalar> PolicyModel<S> {
    /// Uniform policy: every psi starts at zero.
    pub fn new(actions: &[Action], n_features: usize) -> Self {
        PolicyModel {
            n_features,
            feature_labels: Vec::new(),
            heads: actions
                .iter()
                .map(|&action| ActionHead {
                    action,
                    psi0: S::zero(),
                    units: Vec::new(),
                })
                .collect(),
            activation: Activation::Linear,
            stages: 0,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.heads.len()
    }

    pub fn actions(&self) -> Vec<Action> {
        self.heads.iter().map(|h| h.action).collect()
    }

    pub fn action_index(&self, action: Action) -> Option<usize> {
        self.heads.iter().position(|h| h.action == action)
    }

    pub fn n_units(&self) -> usize {
        self.heads.iter().map(|h| h.units.len()).sum()
    }

    pub fn psi_action(&self, a: usize, x: &[S]) -> S {
        let head = &self.heads[a];
        head.units.iter().fold(head.psi0, |acc, u| {
            acc + u.output * u.step * self.activation.apply(u.basis.eval(x))
        })
    }

    pub fn psi(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.n_features, "feature dimension mismatch");
        (0..self.n_actions()).map(|a| self.psi_action(a, x)).collect()
    }

    pub fn policy_prob(&self, x: &[S]) -> Vec<S> {
        softmax(&self.psi(x))
    }

    /// Highest-psi action, ties going to the lowest index.
    pub fn greedy(&self, x: &[S]) -> usize {
        argmax(&self.psi(x))
    }

    /// Categorical draw from the policy, deterministic in `key`.
    pub fn sample_action(&self, x: &[S], key: &[u64]) -> usize {
        sample_categorical(&self.policy_prob(x), rng::unit(key))
    }
}

pub fn softmax<S: Scalar>(psi: &[S]) -> Vec<S> {
    let m = psi.iter().copied().fold(S::neg_infinity(), S::max);
    let exps: Vec<S> = psi.iter().map(|&p| (p - m).exp()).collect();
    let z: S = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / z).collect()
}

pub fn log_softmax<S: Scalar>(psi: &[S]) -> Vec<S> {
    let m = psi.iter().copied().fold(S::neg_infinity(), S::max);
    let lse = m + psi.iter().map(|&p| (p - m).exp()).sum::<S>().ln();
    psi.iter().map(|&p| p - lse).collect()
}

pub fn argmax<S: Scalar>(v: &[S]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub fn sample_categorical<S: Scalar>(probs: &[S], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p.to_f64_lossy();
        if u < acc {
            return i;
        }
    }
    // rounding left a sliver above the last cumulative sum
    probs.iter().rposition(|p| *p > S::zero()).unwrap_or(probs.len() - 1)
}
