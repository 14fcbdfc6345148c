//! Batch training loop: rollouts, then one update per batch.

use std::cell::Cell;
use std::time::{Duration, Instant};

use crate::aggregate::AggregatorConfig;
use crate::engine::{base_gradient, boost, estimate_q, refine_network, BoostConfig, GradientSample, PolicyModel, RefineConfig};
use crate::knowledge::{
    apply_cfg_correction, applicable, baseline_gradient, bayes_gradient, default_box, solve_constrained_psi, FunctionalConstraint,
    InfusionConfig, Mode,
};
use crate::rng::{hash_key, stream};
use crate::sim::{ActionKind, Observation};
use crate::Real;

use super::config::{HarnessError, Method};
use super::scenario::{EvalState, Scenario};

/// One training configuration: method, rule strength and feature arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arm {
    pub method: Method,
    pub lambda_scale: f64,
    pub aggregation: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Pass rate after each batch.
    pub pass_rates: Vec<f64>,
    /// Elapsed time at the end of each batch.
    pub elapsed: Vec<Duration>,
    pub model: PolicyModel<Real>,
    /// Largest |knowledge term| seen, per batch.
    pub max_knowledge_term: Vec<f64>,
}

impl TrainOutcome {
    /// First 1-based batch index whose pass rate reaches `threshold`.
    pub fn time_to_threshold(&self, threshold: f64, batches: usize) -> Option<usize> {
        self.pass_rates.iter().take(batches).position(|&p| p >= threshold).map(|i| i + 1)
    }
}

/// Fraction of states where the greedy action matches the label.
pub fn pass_rate(model: &PolicyModel<Real>, features: &[Vec<Real>], labels: &[usize]) -> f64 {
    assert_eq!(features.len(), labels.len());
    if labels.is_empty() {
        return 0.0;
    }
    let hits = features.iter().zip(labels).filter(|(x, &l)| model.greedy(x) == l).count();
    hits as f64 / labels.len() as f64
}

pub fn eval_pass_rate(model: &PolicyModel<Real>, eval: &[EvalState], agg: &AggregatorConfig) -> f64 {
    let features: Vec<Vec<Real>> = eval.iter().map(|e| crate::aggregate::aggregate(&e.history, agg).values).collect();
    let labels: Vec<usize> = eval.iter().map(|e| e.label).collect();
    pass_rate(model, &features, &labels)
}

fn relevant<'a>(fcs: &'a [FunctionalConstraint], idx: &[usize], kind: ActionKind, keep: impl Fn(&FunctionalConstraint) -> bool) -> Vec<&'a FunctionalConstraint> {
    idx.iter().map(|&i| &fcs[i]).filter(|fc| fc.action == kind && keep(fc)).collect()
}

struct Batch {
    features: Vec<Vec<Real>>,
    actions: Vec<usize>,
    q: Vec<Real>,
    observations: Vec<Observation>,
}

impl Batch {
    fn samples(&self, model: &PolicyModel<Real>) -> Vec<GradientSample<Real>> {
        (0..self.q.len())
            .map(|i| GradientSample::new(model, self.features[i].clone(), self.actions[i], self.q[i]))
            .collect()
    }
}

pub struct Trainer<'a> {
    pub scenario: &'a Scenario,
    pub arm: Arm,
    pub seed: u64,
}

impl<'a> Trainer<'a> {
    fn infusion(&self) -> InfusionConfig {
        let l = &self.scenario.config.learner;
        InfusionConfig {
            lambda_scale: self.arm.lambda_scale,
            laplace_b: 1.0,
            gamma: l.gamma_schedule(),
            prior_times_q: l.prior_times_q,
            free_points: l.free_points.into(),
        }
    }

    fn boost_config(&self) -> BoostConfig {
        let l = &self.scenario.config.learner;
        BoostConfig {
            eta: l.eta,
            subsample: l.subsample,
            ridge: l.ridge,
        }
    }

    fn collect(&self, model: &PolicyModel<Real>, batch: usize, agg: &AggregatorConfig) -> Result<Batch, HarnessError> {
        let scn = self.scenario;
        let mut out = Batch {
            features: Vec::new(),
            actions: Vec::new(),
            q: Vec::new(),
            observations: Vec::new(),
        };
        for r in 0..scn.config.batch_rollouts as u64 {
            let key = [self.seed, batch as u64, r];
            let action_seed = hash_key(&[stream::ACTION, self.seed, batch as u64, r]);
            let visits = scn.rollout(&key, agg, |x, t| model.sample_action(x, &[action_seed, t as u64]))?;
            let rewards: Vec<f64> = visits.iter().map(|v| v.reward).collect();
            out.q.extend(estimate_q::<Real>(&rewards, scn.config.learner.discount));
            for v in visits {
                out.features.push(v.features);
                out.actions.push(v.action);
                out.observations.push(v.observation);
            }
        }
        Ok(out)
    }

    /// Trains for `batches` batches, evaluating after each.
    pub fn run(&self, batches: usize) -> Result<TrainOutcome, HarnessError> {
        let scn = self.scenario;
        let agg = scn.aggregator(self.arm.aggregation);
        let mut model = PolicyModel::<Real>::new(&scn.actions, scn.clauses.len());
        model.feature_labels = scn.clauses.iter().map(|c| (c.id, c.to_string())).collect();
        let eval_features = scn.eval_features(&agg);
        let labels: Vec<usize> = scn.eval.iter().map(|e| e.label).collect();
        let refine = RefineConfig {
            beta: scn.config.learner.beta,
            ..RefineConfig::default()
        };
        let start = Instant::now();
        let mut outcome = TrainOutcome {
            pass_rates: Vec::new(),
            elapsed: Vec::new(),
            model: model.clone(),
            max_knowledge_term: Vec::new(),
        };
        for b in 1..=batches {
            let batch = self.collect(&model, b, &agg)?;
            let knowledge = self.update(&mut model, &batch, b)?;
            let scored = if scn.config.learner.refine_epochs > 0 {
                refine_network(&model, &batch.samples(&model), scn.config.learner.refine_epochs, &refine)
            } else {
                model.clone()
            };
            outcome.pass_rates.push(pass_rate(&scored, &eval_features, &labels));
            outcome.elapsed.push(start.elapsed());
            outcome.max_knowledge_term.push(knowledge);
        }
        outcome.model = model;
        Ok(outcome)
    }

    /// One boosting stage plus any hard-rule projection. Returns the
    /// largest magnitude of the knowledge part of the fitted targets.
    fn update(&self, model: &mut PolicyModel<Real>, batch: &Batch, stage: usize) -> Result<f64, HarnessError> {
        let scn = self.scenario;
        let infusion = self.infusion();
        let cfg = self.boost_config();
        let samples = batch.samples(model);
        let seed = hash_key(&[self.seed, stream::ACTION]);
        let kinds: Vec<ActionKind> = model.heads.iter().map(|h| h.action.kind).collect();
        let fcs = &scn.constraints;
        let app: Vec<Vec<usize>> = batch.observations.iter().map(|o| applicable(fcs, o)).collect();
        let knowledge = Cell::new(0.0f64);
        let track = |g: Real, base: Real| {
            knowledge.set(knowledge.get().max((g - base).abs()));
            g
        };
        match self.arm.method {
            Method::NoKi => {
                boost(model, &samples, |_, s, a| base_gradient(s, a), &cfg, seed);
            }
            Method::Bayes | Method::Combined => {
                let soft_only = self.arm.method == Method::Combined;
                boost(
                    model,
                    &samples,
                    |i, s, a| {
                        let rel = relevant(fcs, &app[i], kinds[a], |fc| !soft_only || fc.mode == Mode::Soft);
                        track(bayes_gradient(s, a, &rel, &infusion), base_gradient(s, a))
                    },
                    &cfg,
                    seed,
                );
                if soft_only {
                    self.project(model, batch, &app, stage, |fc| fc.mode == Mode::Hard)?;
                }
            }
            Method::Cfg => {
                boost(model, &samples, |_, s, a| base_gradient(s, a), &cfg, seed);
                self.project(model, batch, &app, stage, |_| true)?;
            }
            Method::Baseline | Method::BaselineCombined => {
                let rules = if self.arm.method == Method::Baseline { fcs } else { &scn.contrast };
                let app_rules: Vec<Vec<usize>> = if self.arm.method == Method::Baseline {
                    app.clone()
                } else {
                    batch.observations.iter().map(|o| applicable(rules, o)).collect()
                };
                let alpha = if rules.is_empty() {
                    0.0
                } else {
                    self.arm.lambda_scale * rules.iter().map(|fc| fc.alpha).sum::<f64>() / rules.len() as f64
                };
                boost(
                    model,
                    &samples,
                    |i, s, a| {
                        let rel = relevant(rules, &app_rules[i], kinds[a], |_| true);
                        track(baseline_gradient(s, a, &rel, alpha, infusion.prior_times_q), base_gradient(s, a))
                    },
                    &cfg,
                    seed,
                );
            }
        }
        Ok(knowledge.get())
    }

    /// Conditional-gradient projection onto the hard rules selected by
    /// `keep`, stored as one correction basis per affected head.
    fn project(
        &self,
        model: &mut PolicyModel<Real>,
        batch: &Batch,
        app: &[Vec<usize>],
        stage: usize,
        keep: impl Fn(&FunctionalConstraint) -> bool,
    ) -> Result<(), HarnessError> {
        let fcs = &self.scenario.constraints;
        let infusion = self.infusion();
        let gamma = infusion.gamma.gamma(stage);
        for a in 0..model.n_actions() {
            let kind = model.heads[a].action.kind;
            let per_sample: Vec<Vec<&FunctionalConstraint>> = app.iter().map(|idx| relevant(fcs, idx, kind, &keep)).collect();
            if per_sample.iter().all(Vec::is_empty) {
                continue;
            }
            let all: Vec<&FunctionalConstraint> = fcs.iter().filter(|fc| fc.action == kind && keep(fc)).collect();
            let samples = batch.samples(model);
            let target = solve_constrained_psi(&samples, a, &per_sample, default_box(&all), infusion.free_points)
                .map_err(|e| HarnessError::Invalid(e.to_string()))?;
            apply_cfg_correction(model, &samples, a, &target.values, gamma, self.scenario.config.learner.ridge);
        }
        Ok(())
    }
}
