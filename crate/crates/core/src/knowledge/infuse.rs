//! Gradient providers and the conditional-gradient projection.

use thiserror::Error;

use crate::engine::{fit_linear, GradientSample, HiddenUnit, LinearBasis, PolicyModel};
use crate::scalar::{sign0, Scalar};

use super::constraint::FunctionalConstraint;

/// Mixing weights for the conditional-gradient step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSchedule {
    /// `2 / (k + 2)`.
    Classic,
    Constant(f64),
}

impl GammaSchedule {
    pub fn gamma(self, k: usize) -> f64 {
        match self {
            GammaSchedule::Classic => 2.0 / (k as f64 + 2.0),
            GammaSchedule::Constant(g) => g,
        }
    }
}

/// What the projection does at points no hard constraint covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreePoints {
    /// Box vertex `-Omega sign(c)`, the LP minimizer.
    BoxVertex,
    /// `psi* = psi`, so mixing leaves the point alone.
    Keep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfusionConfig {
    pub lambda_scale: f64,
    pub laplace_b: f64,
    pub gamma: GammaSchedule,
    /// Multiply the prior term by Q as well as the likelihood term.
    pub prior_times_q: bool,
    pub free_points: FreePoints,
}

impl Default for InfusionConfig {
    fn default() -> Self {
        InfusionConfig {
            lambda_scale: 1.0,
            laplace_b: 1.0,
            gamma: GammaSchedule::Classic,
            prior_times_q: true,
            free_points: FreePoints::BoxVertex,
        }
    }
}

fn with_prior<S: Scalar>(sample: &GradientSample<S>, a: usize, prior: S, prior_times_q: bool) -> S {
    let likelihood = sample.indicator(a) - sample.probs[a];
    if prior_times_q {
        (likelihood + prior) * sample.q
    } else {
        likelihood * sample.q + prior
    }
}

/// Functional gradient with a Laplace prior at each applicable constraint:
/// `(I - pi) + sum_i lambda alpha_i (-sign(psi - omega_i)) / b`, times Q.
pub fn bayes_gradient<S: Scalar>(sample: &GradientSample<S>, a: usize, fcs: &[&FunctionalConstraint], cfg: &InfusionConfig) -> S {
    let psi = sample.psi[a];
    let scale = S::lit(cfg.lambda_scale / cfg.laplace_b);
    let prior = fcs
        .iter()
        .map(|fc| scale * S::lit(fc.alpha) * -sign0(psi - S::lit(fc.omega)))
        .sum::<S>();
    with_prior(sample, a, prior, cfg.prior_times_q)
}

/// Advice gradient `(I - pi) + alpha (n_t - n_f)`, times Q.
pub fn baseline_gradient<S: Scalar>(sample: &GradientSample<S>, a: usize, fcs: &[&FunctionalConstraint], alpha: f64, prior_times_q: bool) -> S {
    let net: i64 = fcs.iter().map(|fc| fc.direction() as i64).sum();
    with_prior(sample, a, S::lit(alpha * net as f64), prior_times_q)
}

/// `pi (I - pi) Q`: the LP objective coefficient at a sample.
pub fn objective_coefficient<S: Scalar>(sample: &GradientSample<S>, a: usize) -> S {
    sample.probs[a] * (sample.indicator(a) - sample.probs[a]) * sample.q
}

/// Derivative of `psi c - sum_i alpha_i (psi - omega_i)` in psi.
pub fn lagrangian_gradient<S: Scalar>(sample: &GradientSample<S>, a: usize, fcs: &[&FunctionalConstraint]) -> S {
    objective_coefficient(sample, a) - fcs.iter().map(|fc| S::lit(fc.alpha)).sum::<S>()
}

pub fn lagrangian<S: Scalar>(psi: S, coefficient: S, fcs: &[&FunctionalConstraint]) -> S {
    psi * coefficient - fcs.iter().map(|fc| S::lit(fc.alpha) * (psi - S::lit(fc.omega))).sum::<S>()
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("box bound {omega_box} must exceed the largest |omega| ({max_omega})")]
pub struct BoxError {
    pub omega_box: f64,
    pub max_omega: f64,
}

pub fn default_box(fcs: &[&FunctionalConstraint]) -> f64 {
    10.0 * fcs.iter().map(|fc| fc.omega.abs()).fold(1.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedPsi<S> {
    pub values: Vec<S>,
    pub objective: S,
}

/// Per-point LP: equality to the (alpha-weighted mean) omega where hard
/// constraints apply, box vertex `-Omega sign(c)` elsewhere (or the current
/// psi under `FreePoints::Keep`).
///
/// `applicable[i]` lists the hard constraints holding at sample `i`.
pub fn solve_constrained_psi<S: Scalar>(
    samples: &[GradientSample<S>],
    a: usize,
    applicable: &[Vec<&FunctionalConstraint>],
    omega_box: f64,
    free_points: FreePoints,
) -> Result<ConstrainedPsi<S>, BoxError> {
    assert_eq!(samples.len(), applicable.len());
    let max_omega = applicable
        .iter()
        .flatten()
        .map(|fc| fc.omega.abs())
        .fold(0.0, f64::max);
    if omega_box <= max_omega {
        return Err(BoxError { omega_box, max_omega });
    }
    let mut values = Vec::with_capacity(samples.len());
    let mut objective = S::zero();
    for (s, fcs) in samples.iter().zip(applicable) {
        let c = objective_coefficient(s, a);
        let v = if fcs.is_empty() {
            match free_points {
                FreePoints::BoxVertex => S::lit(-omega_box) * sign0(c),
                FreePoints::Keep => s.psi[a],
            }
        } else {
            tied_omega(fcs)
        };
        objective = objective + v * c;
        values.push(v);
    }
    Ok(ConstrainedPsi { values, objective })
}

/// Alpha-weighted mean of the omegas, plain mean if every alpha is zero.
/// A single constraint yields its omega bit for bit.
fn tied_omega<S: Scalar>(fcs: &[&FunctionalConstraint]) -> S {
    if let [fc] = fcs {
        return S::lit(fc.omega);
    }
    let total: f64 = fcs.iter().map(|fc| fc.alpha).sum();
    if total > 0.0 {
        S::lit(fcs.iter().map(|fc| fc.alpha * fc.omega).sum::<f64>() / total)
    } else {
        S::lit(fcs.iter().map(|fc| fc.omega).sum::<f64>() / fcs.len() as f64)
    }
}

/// `(1 - gamma) psi + gamma psi*`.
pub fn cfg_update<S: Scalar>(psi: S, psi_star: S, gamma: f64) -> S {
    assert!((0.0..=1.0).contains(&gamma), "gamma outside [0, 1]");
    if gamma == 0.0 {
        return psi;
    }
    if gamma == 1.0 {
        return psi_star;
    }
    let g = S::lit(gamma);
    (S::one() - g) * psi + g * psi_star
}

/// Mixes head `a` toward `psi_star` and stores the change as a correction
/// basis fitted on the sample points. Returns the fitted basis, or `None`
/// when nothing moves.
pub fn apply_cfg_correction<S: Scalar>(
    model: &mut PolicyModel<S>,
    samples: &[GradientSample<S>],
    a: usize,
    psi_star: &[S],
    gamma: f64,
    ridge: f64,
) -> Option<LinearBasis<S>> {
    let xs: Vec<&[S]> = samples.iter().map(|s| s.features.as_slice()).collect();
    let deltas: Vec<S> = samples
        .iter()
        .zip(psi_star)
        .map(|(s, &target)| {
            let psi = model.psi_action(a, &s.features);
            cfg_update(psi, target, gamma) - psi
        })
        .collect();
    if deltas.iter().all(|d| *d == S::zero()) {
        return None;
    }
    let basis = fit_linear(&xs, &deltas, S::lit(ridge));
    model.heads[a].units.push(HiddenUnit {
        basis: basis.clone(),
        step: S::one(),
        output: S::one(),
    });
    Some(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::constraint::{parse_constraint, Mode};
    use crate::sim::ActionKind;

    fn fc(omega: f64, alpha: f64) -> FunctionalConstraint {
        FunctionalConstraint {
            action: ActionKind::LockShop,
            head_vars: vec!["State".into(), "Shop".into()],
            body: Vec::new(),
            omega,
            alpha,
            mode: Mode::Soft,
        }
    }

    fn sample(psi: Vec<f64>, action: usize, q: f64) -> GradientSample<f64> {
        let probs = crate::engine::softmax(&psi);
        GradientSample {
            features: vec![],
            action,
            psi,
            probs,
            q,
        }
    }

    #[test]
    fn bayes_examples() {
        let s = sample(vec![0.0, 0.0], 0, 1.0);
        let mut s1 = s.clone();
        s1.probs = vec![0.731059, 0.268941];
        let up = fc(10.0, 1.0);
        let g = bayes_gradient(&s1, 0, &[&up], &InfusionConfig::default());
        assert!((g - 1.268941).abs() < 1e-12);
        assert_eq!(bayes_gradient(&s, 1, &[], &InfusionConfig::default()), crate::engine::base_gradient(&s, 1));
        let at = fc(0.0, 3.0);
        assert_eq!(bayes_gradient(&s, 0, &[&at], &InfusionConfig::default()), 0.5);
    }

    #[test]
    fn sign_semantics() {
        let s = sample(vec![0.0, 0.0], 1, 0.0);
        let cfg = InfusionConfig {
            prior_times_q: false,
            ..InfusionConfig::default()
        };
        assert_eq!(bayes_gradient(&s, 0, &[&fc(50.0, 2.0)], &cfg), 2.0);
        assert_eq!(bayes_gradient(&s, 0, &[&fc(-50.0, 2.0)], &cfg), -2.0);
    }

    #[test]
    fn baseline_example() {
        let s = sample(vec![0.0, 0.0], 1, 1.0);
        let fcs = [fc(1.0, 0.5), fc(2.0, 0.5), fc(-1.0, 0.5)];
        let refs: Vec<&FunctionalConstraint> = fcs.iter().collect();
        assert_eq!(baseline_gradient(&s, 0, &refs, 0.5, true), 0.0);
        let cancel = [fc(1.0, 0.5), fc(-1.0, 0.5)];
        let refs: Vec<&FunctionalConstraint> = cancel.iter().collect();
        assert_eq!(baseline_gradient(&s, 0, &refs, 0.5, true), crate::engine::base_gradient(&s, 0));
    }

    #[test]
    fn lagrangian_example() {
        let s = sample(vec![0.0, 0.0], 0, 1.0);
        assert_eq!(lagrangian_gradient(&s, 0, &[&fc(1.0, 1.0)]), -0.75);
        assert_eq!(lagrangian_gradient(&s, 0, &[]), 0.25);
    }

    #[test]
    fn lp_examples() {
        let mut s = sample(vec![0.0, 0.0], 0, 0.0);
        s.probs = vec![0.5, 0.5];
        s.q = 2.4;
        let up = fc(1.0, 1.0);
        let out = solve_constrained_psi(&[s.clone(), s.clone()], 0, &[vec![&up], vec![]], 5.0, FreePoints::BoxVertex).unwrap();
        assert_eq!(out.values, vec![1.0, -5.0]);
        assert!(solve_constrained_psi(&[s], 0, &[vec![&up]], 1.0, FreePoints::BoxVertex).is_err());
        let both = [fc(1.0, 1.0), fc(-2.0, 3.0)];
        let refs: Vec<&FunctionalConstraint> = both.iter().collect();
        assert_eq!(tied_omega::<f64>(&refs), -1.25);
    }

    #[test]
    fn mixing_examples() {
        assert_eq!(cfg_update(2.0, -1.0, 0.0), 2.0);
        assert_eq!(cfg_update(2.0, -1.0, 1.0), -1.0);
        assert!((cfg_update(2.0f64, -1.0, 0.3) - 1.1).abs() < 1e-15);
        assert_eq!(GammaSchedule::Classic.gamma(1), 2.0 / 3.0);
    }

    #[test]
    fn paper_rules_parse_into_providers() {
        let soft = parse_constraint("lockshop(State,Shop) :- sopen(State,Shop) , omega=-1 , alpha=1 , mode=soft", 1).unwrap();
        let s = sample(vec![0.0, 0.0], 1, 0.0);
        let cfg = InfusionConfig {
            prior_times_q: false,
            ..InfusionConfig::default()
        };
        assert_eq!(bayes_gradient(&s, 0, &[&soft], &cfg), -1.0);
    }
}
