//! A loaded experiment: config plus features, rules, oracle and the frozen
//! evaluation set.

use std::path::{Path, PathBuf};

use crate::aggregate::{aggregate, AggregatorConfig, CountHistory};
use crate::knowledge::{parse_constraints, FunctionalConstraint};
use crate::logic::{enumerate_clauses, featurize, parse_clause_file, select_features, Clause, ModeDeclaration, Schema};
use crate::rng::hash_key;
use crate::sim::{init_city, observe, step, Action, CityConfig, Observation, WorldState};
use crate::Real;

use super::config::{ExperimentConfig, HarnessError};
use super::oracle::Oracle;

/// Salt separating evaluation rollouts from training rollouts.
const EVAL_STREAM: u64 = 0xE7A1;
const TRAIN_STREAM: u64 = 0x7A1E;

/// A state the policy is scored on.
#[derive(Debug, Clone)]
pub struct EvalState {
    pub observation: Observation,
    pub history: CountHistory,
    pub label: usize,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ExperimentConfig,
    pub actions: Vec<Action>,
    pub clauses: Vec<Clause>,
    pub constraints: Vec<FunctionalConstraint>,
    pub contrast: Vec<FunctionalConstraint>,
    pub oracle: Oracle,
    pub eval: Vec<EvalState>,
}

fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_constraints(path: &Path) -> Result<Vec<FunctionalConstraint>, HarnessError> {
    parse_constraints(&read(path)?).map_err(|source| HarnessError::Constraints {
        path: path.to_path_buf(),
        source,
    })
}

/// One decision point of a rollout.
#[derive(Debug, Clone)]
pub struct Visit {
    pub observation: Observation,
    pub features: Vec<Real>,
    pub action: usize,
    pub reward: f64,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = read(path)?;
        let config = ExperimentConfig::from_toml(&text, path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Scenario::from_config(config, &base)
    }

    /// Resolves file references against `base`.
    pub fn from_config(config: ExperimentConfig, base: &Path) -> Result<Self, HarnessError> {
        config.validate()?;
        let resolve = |p: &PathBuf| base.join(p);
        let constraints = match &config.constraints {
            Some(p) => load_constraints(&resolve(p))?,
            None => Vec::new(),
        };
        let contrast = match &config.contrast_constraints {
            Some(p) => load_constraints(&resolve(p))?,
            None => Vec::new(),
        };
        let clauses = match &config.features {
            Some(p) => {
                let path = resolve(p);
                parse_clause_file(&read(&path)?).map_err(|source| HarnessError::Clauses { path, source })?
            }
            None => Vec::new(),
        };
        Scenario::assemble(config, clauses, constraints, contrast)
    }

    /// Builds the oracle and the evaluation set. With no clauses given,
    /// features are selected by mutual information with the oracle labels.
    pub fn assemble(
        config: ExperimentConfig,
        clauses: Vec<Clause>,
        constraints: Vec<FunctionalConstraint>,
        contrast: Vec<FunctionalConstraint>,
    ) -> Result<Self, HarnessError> {
        config.validate()?;
        let actions = config.parsed_actions()?;
        for fc in constraints.iter().chain(&contrast) {
            if !actions.iter().any(|a| a.kind == fc.action) {
                return Err(HarnessError::Invalid(format!("constraint `{fc}` targets an action outside the action list")));
            }
        }
        let oracle = Oracle::new(config.oracle, config.case_rule.as_ref(), &actions, &config.city, config.learner.discount)?;
        let mut scenario = Scenario {
            config,
            actions,
            clauses,
            constraints,
            contrast,
            oracle,
            eval: Vec::new(),
        };
        if scenario.clauses.is_empty() {
            scenario.clauses = scenario.select_clauses()?;
        }
        scenario.eval = scenario.build_eval_set()?;
        Ok(scenario)
    }

    pub fn city_for(&self, key: &[u64]) -> CityConfig {
        let mut city = self.config.city.clone();
        city.seed = hash_key(key);
        city
    }

    pub fn initial_state(&self, city: &CityConfig) -> Result<WorldState, HarnessError> {
        let mut state = init_city(city)?;
        for ev in &self.config.events {
            state.inject_event(ev.clone(), city)?;
        }
        Ok(state)
    }

    /// Runs the oracle policy and records every true state with its label.
    fn oracle_rollout(&self, city: &CityConfig) -> Result<Vec<(WorldState, Observation, usize)>, HarnessError> {
        let mut state = self.initial_state(city)?;
        let mut out = Vec::with_capacity(city.horizon);
        let mut seen = Vec::with_capacity(city.horizon);
        while state.time < city.horizon {
            let obs = observe(&state, city);
            seen.push(obs.clone());
            let label = self.oracle.decide(&state, city, &seen)?;
            let next = step(&state, self.actions[label], city)?.state;
            out.push((state, obs, label));
            state = next;
        }
        Ok(out)
    }

    /// States from oracle rollouts at fixed seeds, subsampled evenly to
    /// `eval_states` entries.
    fn build_eval_set(&self) -> Result<Vec<EvalState>, HarnessError> {
        let want = self.config.eval_states;
        let horizon = self.config.city.horizon;
        let episodes = want.div_ceil(horizon).max(1) * 2;
        let mut pool = Vec::new();
        for e in 0..episodes as u64 {
            let city = self.city_for(&[EVAL_STREAM, self.config.eval_seed, e]);
            let mut history = CountHistory::new(self.clauses.len());
            for (_, obs, label) in self.oracle_rollout(&city)? {
                history.push(&featurize(&obs.facts, &self.clauses));
                pool.push(EvalState {
                    observation: obs,
                    history: history.clone(),
                    label,
                });
            }
        }
        let stride = pool.len() as f64 / want as f64;
        Ok((0..want).map(|i| pool[(i as f64 * stride) as usize].clone()).collect())
    }

    fn select_clauses(&self) -> Result<Vec<Clause>, HarnessError> {
        let sel = self.config.selection;
        let candidates = enumerate_clauses(&Schema::full(), &ModeDeclaration::default(), sel.max_len);
        let mut labeled = Vec::new();
        for e in 0..4u64 {
            let city = self.city_for(&[EVAL_STREAM, self.config.eval_seed ^ 0x5E1E, e]);
            for (_, obs, label) in self.oracle_rollout(&city)? {
                labeled.push((obs.facts, label));
            }
        }
        let refs: Vec<_> = labeled.iter().map(|(f, l)| (f, *l)).collect();
        let chosen = select_features(&candidates, &refs, sel.mi_threshold, sel.budget);
        if chosen.is_empty() {
            return Err(HarnessError::Invalid("no clause carries information about the oracle labels".into()));
        }
        Ok(chosen)
    }

    pub fn aggregator(&self, enabled: bool) -> AggregatorConfig {
        AggregatorConfig {
            enabled,
            ..self.config.aggregator
        }
    }

    pub fn eval_features(&self, agg: &AggregatorConfig) -> Vec<Vec<Real>> {
        self.eval.iter().map(|e| aggregate(&e.history, agg).values).collect()
    }

    /// One episode under `choose`, which sees the aggregated features and
    /// returns an action index.
    pub fn rollout(
        &self,
        key: &[u64],
        agg: &AggregatorConfig,
        mut choose: impl FnMut(&[Real], usize) -> usize,
    ) -> Result<Vec<Visit>, HarnessError> {
        let mut full_key = vec![TRAIN_STREAM];
        full_key.extend_from_slice(key);
        let city = self.city_for(&full_key);
        let mut state = self.initial_state(&city)?;
        let mut history = CountHistory::new(self.clauses.len());
        let mut visits = Vec::with_capacity(city.horizon);
        while state.time < city.horizon {
            let obs = observe(&state, &city);
            history.push(&featurize(&obs.facts, &self.clauses));
            let features = aggregate::<Real>(&history, agg).values;
            let action = choose(&features, state.time);
            let out = step(&state, self.actions[action], &city)?;
            visits.push(Visit {
                observation: obs,
                features,
                action,
                reward: out.reward,
            });
            state = out.state;
        }
        Ok(visits)
    }
}
