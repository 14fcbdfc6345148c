//! Experiment configuration read from TOML.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::AggregatorConfig;
use crate::knowledge::{ConstraintParseError, FreePoints, GammaSchedule};
use crate::logic::ClauseFileError;
use crate::sim::{Action, ActionError, CityConfig, ConfigError, EventSpec};

use super::oracle::{CaseRule, OracleError, OracleKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Bayes,
    #[serde(rename = "CFG")]
    Cfg,
    Combined,
    #[serde(rename = "NoKI")]
    NoKi,
    Baseline,
    BaselineCombined,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Bayes,
        Method::Cfg,
        Method::Combined,
        Method::NoKi,
        Method::Baseline,
        Method::BaselineCombined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Bayes => "Bayes",
            Method::Cfg => "CFG",
            Method::Combined => "Combined",
            Method::NoKi => "NoKI",
            Method::Baseline => "Baseline",
            Method::BaselineCombined => "BaselineCombined",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearnerConfig {
    pub eta: f64,
    pub subsample: f64,
    pub ridge: f64,
    pub discount: f64,
    /// Backpropagation epochs applied to a copy of the model before each
    /// evaluation; 0 keeps the boosted model.
    pub refine_epochs: usize,
    pub beta: f64,
    pub prior_times_q: bool,
    pub free_points: FreePointsSetting,
    /// Fixed CFG mixing weight; the `2/(k+2)` schedule when absent.
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreePointsSetting {
    Keep,
    BoxVertex,
}

impl From<FreePointsSetting> for FreePoints {
    fn from(s: FreePointsSetting) -> Self {
        match s {
            FreePointsSetting::Keep => FreePoints::Keep,
            FreePointsSetting::BoxVertex => FreePoints::BoxVertex,
        }
    }
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            eta: 0.5,
            subsample: 0.7,
            ridge: crate::engine::fit::DEFAULT_RIDGE,
            discount: crate::engine::DEFAULT_DISCOUNT,
            refine_epochs: 0,
            beta: crate::engine::policy::DEFAULT_BETA,
            prior_times_q: false,
            free_points: FreePointsSetting::Keep,
            gamma: None,
        }
    }
}

impl LearnerConfig {
    pub fn gamma_schedule(&self) -> GammaSchedule {
        match self.gamma {
            Some(g) => GammaSchedule::Constant(g),
            None => GammaSchedule::Classic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionConfig {
    pub max_len: usize,
    pub mi_threshold: f64,
    pub budget: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            max_len: 3,
            mi_threshold: 0.01,
            budget: 12,
        }
    }
}

fn default_budgets() -> Vec<usize> {
    vec![20, 50, 100]
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_seeds() -> Vec<u64> {
    (1..=10).collect()
}
fn default_true() -> bool {
    true
}
fn default_threshold() -> f64 {
    0.75
}
fn default_batch() -> usize {
    10
}
fn default_eval_states() -> usize {
    100
}
fn default_lambda() -> f64 {
    1.0
}
fn default_event_lambdas() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default = "default_budgets")]
    pub budgets: Vec<usize>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_true")]
    pub aggregation: bool,
    pub actions: Vec<String>,
    /// Constraint file, relative to the config file.
    #[serde(default)]
    pub constraints: Option<PathBuf>,
    /// Constraints stated with both signs, for `BaselineCombined`.
    #[serde(default)]
    pub contrast_constraints: Option<PathBuf>,
    /// Clause file; features are selected by mutual information if absent.
    #[serde(default)]
    pub features: Option<PathBuf>,
    #[serde(default = "default_lambda")]
    pub lambda_scale: f64,
    #[serde(default = "default_event_lambdas")]
    pub event_lambdas: Vec<f64>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_batch")]
    pub batch_rollouts: usize,
    #[serde(default)]
    pub oracle: OracleKind,
    #[serde(default)]
    pub case_rule: Option<CaseRule>,
    #[serde(default = "default_eval_states")]
    pub eval_states: usize,
    #[serde(default)]
    pub eval_seed: u64,
    /// Clause ids expected to dominate the `explain` ranking.
    #[serde(default)]
    pub reference_features: Vec<usize>,
    #[serde(default)]
    pub learner: LearnerConfig,
    #[serde(default)]
    pub aggregator: AggregatorConfig,
    #[serde(default)]
    pub selection: SelectionConfig,
    pub city: CityConfig,
    #[serde(default)]
    pub events: Vec<EventSpec>,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Toml { path: PathBuf, message: String },
    #[error("invalid experiment config: {0}")]
    Invalid(String),
    #[error(transparent)]
    City(#[from] ConfigError),
    #[error("action `{text}`: {source}")]
    Action {
        text: String,
        #[source]
        source: ActionError,
    },
    #[error("{path}: {source}")]
    Constraints {
        path: PathBuf,
        #[source]
        source: ConstraintParseError,
    },
    #[error("{path}: {source}")]
    Clauses {
        path: PathBuf,
        #[source]
        source: ClauseFileError,
    },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Toml {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn parsed_actions(&self) -> Result<Vec<Action>, HarnessError> {
        self.actions
            .iter()
            .map(|t| {
                let a: Action = t.parse().map_err(|source| HarnessError::Action { text: t.clone(), source })?;
                a.validate(&self.city).map_err(|source| HarnessError::Action { text: t.clone(), source })?;
                Ok(a)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Invalid(m.to_string()));
        self.city.validate()?;
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if self.budgets.is_empty() || self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return bad("budgets must be non-empty and strictly ascending");
        }
        if self.batch_rollouts == 0 {
            return bad("batch_rollouts must be at least 1");
        }
        if self.budgets.iter().any(|b| *b == 0 || b % self.batch_rollouts != 0) {
            return bad("every budget must be a positive multiple of batch_rollouts");
        }
        if self.methods.is_empty() {
            return bad("at least one method is required");
        }
        if self.actions.len() < 2 {
            return bad("at least two actions are required");
        }
        if self.eval_states < 20 {
            return bad("eval_states must be at least 20");
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad("threshold must lie in [0, 1]");
        }
        if !(self.lambda_scale >= 0.0 && self.lambda_scale.is_finite()) {
            return bad("lambda_scale must be finite and non-negative");
        }
        let l = &self.learner;
        if !(0.0..1.0).contains(&l.discount) {
            return bad("learner.discount must lie in [0, 1)");
        }
        if !(l.subsample > 0.0 && l.subsample <= 1.0) {
            return bad("learner.subsample must lie in (0, 1]");
        }
        if l.gamma.is_some_and(|g| !(0.0..=1.0).contains(&g)) {
            return bad("learner.gamma must lie in [0, 1]");
        }
        if !(l.beta > 0.0) {
            return bad("learner.beta must be positive");
        }
        let needs_constraints = self.methods.iter().any(|m| !matches!(m, Method::NoKi | Method::BaselineCombined));
        if needs_constraints && self.constraints.is_none() {
            return bad("knowledge methods need a `constraints` file");
        }
        if self.methods.contains(&Method::BaselineCombined) && self.contrast_constraints.is_none() {
            return bad("BaselineCombined needs a `contrast_constraints` file");
        }
        self.parsed_actions()?;
        Ok(())
    }

    pub fn max_budget(&self) -> usize {
        *self.budgets.last().expect("validated")
    }

    pub fn n_batches(&self) -> usize {
        self.max_budget() / self.batch_rollouts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"
actions = ["LockShop:shop0", "UnlockShop:shop0"]
methods = ["NoKI"]

[city]
n_res = 1
n_homes_per_res = 2
n_persons_per_home = 2
n_shops = 1
n_workplaces = 4
n_hospitals = 1
route_map = [["res0", "shop0"]]
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_toml(MINIMAL, Path::new("t.toml")).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.budgets, vec![20, 50, 100]);
        assert_eq!(cfg.seeds.len(), 10);
        assert_eq!(cfg.threshold, 0.75);
        assert_eq!(cfg.n_batches(), 10);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut cfg = ExperimentConfig::from_toml(MINIMAL, Path::new("t.toml")).unwrap();
        cfg.budgets = vec![50, 20];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::from_toml(MINIMAL, Path::new("t.toml")).unwrap();
        cfg.methods = vec![Method::Bayes];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::from_toml(MINIMAL, Path::new("t.toml")).unwrap();
        cfg.actions.push("LockShop:shop9".into());
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::from_toml("name = 3", Path::new("t.toml")).is_err());
        assert_eq!("cfg".parse::<Method>(), Ok(Method::Cfg));
    }
}
