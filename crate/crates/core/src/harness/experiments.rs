//! The comparison, ablation, event-timing and weight-inspection studies.

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::PolicyModel;
use crate::sim::{Action, ActionKind};
use crate::Real;

use super::config::{HarnessError, Method};
use super::report::{mean_sd, ReportRow, ReportTable};
use super::scenario::Scenario;
use super::train::{Arm, TrainOutcome, Trainer};

pub fn arm_label(aggregation: bool) -> &'static str {
    if aggregation {
        "agg"
    } else {
        "no-agg"
    }
}

fn train_cells(scn: &Scenario, arms: &[(Arm, String)], batches: usize) -> Result<Vec<(usize, u64, TrainOutcome)>, HarnessError> {
    let cells: Vec<(usize, u64)> = (0..arms.len())
        .flat_map(|a| scn.config.seeds.iter().map(move |&s| (a, s)))
        .collect();
    cells
        .par_iter()
        .map(|&(a, seed)| {
            let trainer = Trainer {
                scenario: scn,
                arm: arms[a].0,
                seed,
            };
            trainer.run(batches).map(|o| (a, seed, o))
        })
        .collect()
}

fn rows_for(scn: &Scenario, arms: &[(Arm, String)], results: &[(usize, u64, TrainOutcome)], budgets: &[usize]) -> Vec<ReportRow> {
    let per = scn.config.batch_rollouts;
    let mut rows = Vec::new();
    for (a, seed, out) in results {
        for &budget in budgets {
            let b = budget / per;
            rows.push(ReportRow {
                method: arms[*a].0.method.to_string(),
                arm: arms[*a].1.clone(),
                budget,
                seed: *seed,
                pass_rate: out.pass_rates[b - 1],
                time_to_threshold: out.time_to_threshold(scn.config.threshold, b),
                wall_clock_s: out.elapsed[b - 1].as_secs_f64(),
            });
        }
    }
    rows
}

/// Every configured method at every budget and seed. A budget's result is
/// the checkpoint of one longer run, which is the same model a run with
/// exactly that budget would produce.
pub fn run_comparison(scn: &Scenario) -> Result<ReportTable, HarnessError> {
    run_comparison_with_models(scn).map(|(table, _)| table)
}

/// Final model of one training run.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub method: Method,
    pub seed: u64,
    pub model: PolicyModel<Real>,
}

/// As [`run_comparison`], also returning each run's model at the largest budget.
pub fn run_comparison_with_models(scn: &Scenario) -> Result<(ReportTable, Vec<TrainedModel>), HarnessError> {
    let cfg = &scn.config;
    let arms: Vec<(Arm, String)> = cfg
        .methods
        .iter()
        .map(|&method| {
            (
                Arm {
                    method,
                    lambda_scale: cfg.lambda_scale,
                    aggregation: cfg.aggregation,
                },
                arm_label(cfg.aggregation).to_string(),
            )
        })
        .collect();
    let results = train_cells(scn, &arms, cfg.n_batches())?;
    let table = ReportTable {
        title: format!("{}: pass rate by method and trajectory budget", cfg.name),
        rows: rows_for(scn, &arms, &results, &cfg.budgets),
    };
    let models = results
        .into_iter()
        .map(|(a, seed, out)| TrainedModel {
            method: arms[a].0.method,
            seed,
            model: out.model,
        })
        .collect();
    Ok((table, models))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub method: String,
    pub budget: usize,
    pub with_aggregation: f64,
    pub without_aggregation: f64,
    /// Mean over seeds of (with - without), paired by seed.
    pub difference: f64,
}

/// Paired runs with aggregation on and off.
pub fn run_ablation(scn: &Scenario) -> Result<(ReportTable, Vec<AblationRow>), HarnessError> {
    let cfg = &scn.config;
    let arms: Vec<(Arm, String)> = cfg
        .methods
        .iter()
        .flat_map(|&method| {
            [true, false].map(|aggregation| {
                (
                    Arm {
                        method,
                        lambda_scale: cfg.lambda_scale,
                        aggregation,
                    },
                    arm_label(aggregation).to_string(),
                )
            })
        })
        .collect();
    let results = train_cells(scn, &arms, cfg.n_batches())?;
    let table = ReportTable {
        title: format!("{}: aggregation ablation", cfg.name),
        rows: rows_for(scn, &arms, &results, &cfg.budgets),
    };
    let mut summary = Vec::new();
    for &method in &cfg.methods {
        for &budget in &cfg.budgets {
            let pick = |arm: &str| -> Vec<(u64, f64)> {
                table
                    .rows
                    .iter()
                    .filter(|r| r.method == method.name() && r.arm == arm && r.budget == budget)
                    .map(|r| (r.seed, r.pass_rate))
                    .collect()
            };
            let (on, off) = (pick("agg"), pick("no-agg"));
            let diffs: Vec<f64> = on
                .iter()
                .filter_map(|(s, p)| off.iter().find(|(t, _)| t == s).map(|(_, q)| p - q))
                .collect();
            summary.push(AblationRow {
                method: method.to_string(),
                budget,
                with_aggregation: mean_sd(&on.iter().map(|x| x.1).collect::<Vec<_>>()).0,
                without_aggregation: mean_sd(&off.iter().map(|x| x.1).collect::<Vec<_>>()).0,
                difference: mean_sd(&diffs).0,
            });
        }
    }
    Ok((table, summary))
}

pub fn ablation_text(rows: &[AblationRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.method.clone(),
                r.budget.to_string(),
                format!("{:.3}", r.with_aggregation),
                format!("{:.3}", r.without_aggregation),
                format!("{:+.3}", r.difference),
            ]
        })
        .collect();
    super::report::aligned(&["method", "budget", "agg", "no-agg", "difference"], &body)
}

/// Time to threshold under injected events, for the Bayesian learner at
/// each configured rule strength and for CFG.
pub fn run_event_study(scn: &Scenario) -> Result<ReportTable, HarnessError> {
    let cfg = &scn.config;
    if cfg.events.is_empty() {
        return Err(HarnessError::Invalid("the event study needs at least one [[events]] entry".into()));
    }
    let mut arms: Vec<(Arm, String)> = cfg
        .event_lambdas
        .iter()
        .map(|&l| {
            (
                Arm {
                    method: Method::Bayes,
                    lambda_scale: l,
                    aggregation: cfg.aggregation,
                },
                format!("lambda={l}"),
            )
        })
        .collect();
    arms.push((
        Arm {
            method: Method::Cfg,
            lambda_scale: cfg.lambda_scale,
            aggregation: cfg.aggregation,
        },
        "cfg".into(),
    ));
    let results = train_cells(scn, &arms, cfg.n_batches())?;
    Ok(ReportTable {
        title: format!("{}: batches to reach pass rate {}", cfg.name, cfg.threshold),
        rows: rows_for(scn, &arms, &results, &[cfg.max_budget()]),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureWeight {
    pub clause_id: usize,
    pub clause: String,
    pub weight: f64,
}

/// Head index for `lockshop`, `LockShop` or `LockShop:shop0`.
pub fn find_action(model: &PolicyModel<Real>, name: &str) -> Option<usize> {
    if let Ok(a) = name.parse::<Action>() {
        if let Some(i) = model.action_index(a) {
            return Some(i);
        }
    }
    let kind = ActionKind::from_name(name.split(':').next()?.trim())?;
    model.heads.iter().position(|h| h.action.kind == kind)
}

/// `sum_j |v_j eta_j w_ij|` per input, largest first.
pub fn input_weights(model: &PolicyModel<Real>, action: usize) -> Vec<f64> {
    let mut w = vec![0.0; model.n_features];
    for u in &model.heads[action].units {
        let scale = (u.output * u.step).abs();
        for (acc, x) in w.iter_mut().zip(&u.basis.weights) {
            *acc += scale * x.abs();
        }
    }
    w
}

fn ranked(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

pub fn interpretability_report(model: &PolicyModel<Real>, action: usize) -> Vec<FeatureWeight> {
    let w = input_weights(model, action);
    ranked(&w)
        .into_iter()
        .map(|i| {
            let (clause_id, clause) = model.feature_labels.get(i).cloned().unwrap_or((i + 1, format!("feature {}", i + 1)));
            FeatureWeight {
                clause_id,
                clause,
                weight: w[i],
            }
        })
        .collect()
}

/// Fraction of states whose top-`k` inputs by `|weight x value|` are
/// exactly the clauses in `reference`.
pub fn top_k_agreement(model: &PolicyModel<Real>, action: usize, states: &[Vec<Real>], reference: &[usize], k: usize) -> f64 {
    if states.is_empty() {
        return 0.0;
    }
    let w = input_weights(model, action);
    let ids: Vec<usize> = (0..model.n_features)
        .map(|i| model.feature_labels.get(i).map_or(i + 1, |l| l.0))
        .collect();
    let mut want: Vec<usize> = reference.to_vec();
    want.sort_unstable();
    let hits = states
        .iter()
        .filter(|x| {
            let contrib: Vec<f64> = w.iter().zip(x.iter()).map(|(w, v)| w * v.abs()).collect();
            let mut top: Vec<usize> = ranked(&contrib).into_iter().take(k).map(|i| ids[i]).collect();
            top.sort_unstable();
            top == want
        })
        .count();
    hits as f64 / states.len() as f64
}
