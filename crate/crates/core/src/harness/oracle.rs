//! Reference decision makers that read the true world state.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{count_groundings, Clause};
use crate::sim::{Action, CityConfig, Health, Location, Observation, WorldState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle has no decision for state at t={time}: {reason}")]
    Undefined { time: usize, reason: String },
    #[error("oracle needs actions {needed:?} in the action list")]
    MissingAction { needed: Vec<String> },
    #[error("value iteration needs {0}")]
    Unsupported(String),
    #[error("case rule: {0}")]
    Rule(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    /// Lock the shop while an infected and a susceptible person would meet
    /// there; otherwise unlock. Reads the true state.
    #[default]
    Exposure,
    /// Decision table over observations: see [`CaseRule`].
    CaseRule,
    /// Exhaustive value iteration on per-compartment counts.
    ValueIteration,
}

/// Lock while some clause has had at least `min_count` groundings in any
/// of the last `quiet_period` observations (current one included).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseRule {
    pub clause: String,
    #[serde(default = "one")]
    pub min_count: u64,
    #[serde(default = "one")]
    pub quiet_period: u64,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone)]
struct CompiledCaseRule {
    clause: Clause,
    min_count: u64,
    quiet_period: usize,
}

impl CompiledCaseRule {
    fn locks(&self, history: &[Observation]) -> bool {
        history
            .iter()
            .rev()
            .take(self.quiet_period.max(1))
            .any(|o| count_groundings(&o.facts, &self.clause) >= self.min_count)
    }
}

/// Can infection pass through `shop` this step if it stays open?
pub fn shop_exposure(state: &WorldState, config: &CityConfig, shop: usize) -> bool {
    let mut infected = false;
    let mut susceptible = false;
    for p in &state.persons {
        let confined = !p.is_alive()
            || p.hospitalized
            || p.quarantined
            || state.locks.homes[p.home]
            || state.locks.res[p.res]
            || config.shop_of_res(p.res) != shop
            || config
                .route_between(Location::Res(p.res), Location::Shop(shop))
                .is_some_and(|r| state.locks.routes[r]);
        if confined {
            continue;
        }
        infected |= p.health == Health::Infected;
        susceptible |= p.health == Health::Susceptible;
    }
    infected && susceptible
}

/// Compartment counts: susceptible, undetected infected, isolated
/// infected (quarantined or in hospital), removed.
type Counts = [u8; 4];

fn counts_of(state: &WorldState) -> Counts {
    let mut c = [0u8; 4];
    for p in &state.persons {
        let k = match p.health {
            Health::Susceptible => 0,
            Health::Infected if p.quarantined || p.hospitalized => 2,
            Health::Infected => 1,
            Health::Recovered | Health::Dead => 3,
        };
        c[k] += 1;
    }
    c
}

/// Optimal lock/unlock table for a city where the shop is the only place
/// people meet. Locking is preferred only when it strictly lowers expected
/// discounted deaths; ties go to unlocking.
#[derive(Debug, Clone)]
pub struct ValueTable {
    values: HashMap<Counts, f64>,
    lock_better: HashMap<Counts, bool>,
    pub iterations: usize,
}

const VI_TOLERANCE: f64 = 1e-12;
pub const MAX_VI_STATES: usize = 500;

impl ValueTable {
    pub fn solve(config: &CityConfig, discount: f64) -> Result<Self, OracleError> {
        let pop = config.population();
        if config.n_shops != 1 || config.n_res != 1 {
            return Err(OracleError::Unsupported("exactly one residential area and one shop".into()));
        }
        if config.n_workplaces < pop {
            return Err(OracleError::Unsupported("one workplace per person so the shop is the only mixing venue".into()));
        }
        let states = enumerate_counts(pop);
        if 2 * states.len() > MAX_VI_STATES {
            return Err(OracleError::Unsupported(format!("at most {MAX_VI_STATES} abstract states, got {}", 2 * states.len())));
        }
        let sir = &config.sir;
        let trans: HashMap<(Counts, bool), (f64, Vec<(Counts, f64)>)> = states
            .iter()
            .flat_map(|&c| [(c, true), (c, false)])
            .map(|(c, open)| {
                let deaths = (c[1] + c[2]) as f64 * (1.0 - sir.gamma_recovery) * sir.mortality;
                ((c, open), (-deaths, transition(c, open, config)))
            })
            .collect();
        let mut values: HashMap<Counts, f64> = states.iter().map(|&c| (c, 0.0)).collect();
        let q = |values: &HashMap<Counts, f64>, c: Counts, open: bool| {
            let (r, next) = &trans[&(c, open)];
            r + discount * next.iter().map(|(n, p)| p * values[n]).sum::<f64>()
        };
        let mut iterations = 0;
        loop {
            iterations += 1;
            let mut delta: f64 = 0.0;
            let mut next = values.clone();
            for &c in &states {
                let v = q(&values, c, true).max(q(&values, c, false));
                delta = delta.max((v - values[&c]).abs());
                next.insert(c, v);
            }
            values = next;
            if delta < VI_TOLERANCE || iterations > 10_000 {
                break;
            }
        }
        let lock_better = states
            .iter()
            .map(|&c| (c, q(&values, c, false) > q(&values, c, true) + 1e-9))
            .collect();
        Ok(ValueTable {
            values,
            lock_better,
            iterations,
        })
    }

    pub fn n_states(&self) -> usize {
        2 * self.values.len()
    }

    pub fn value(&self, state: &WorldState) -> Option<f64> {
        self.values.get(&counts_of(state)).copied()
    }

    pub fn prefers_lock(&self, state: &WorldState) -> Result<bool, OracleError> {
        self.lock_better.get(&counts_of(state)).copied().ok_or_else(|| OracleError::Undefined {
            time: state.time,
            reason: format!("counts {:?} outside the abstraction", counts_of(state)),
        })
    }
}

fn enumerate_counts(pop: usize) -> Vec<Counts> {
    let mut out = Vec::new();
    for s in 0..=pop {
        for f in 0..=pop - s {
            for i in 0..=pop - s - f {
                out.push([s as u8, f as u8, i as u8, (pop - s - f - i) as u8]);
            }
        }
    }
    out
}

/// Distribution of next counts, mirroring the simulator's order: mix,
/// test, then progress those infected before the step. Hospital capacity
/// is not modeled.
fn transition(c: Counts, shop_open: bool, config: &CityConfig) -> Vec<(Counts, f64)> {
    let sir = &config.sir;
    let (g, m, h, tau) = (sir.gamma_recovery, sir.mortality, config.hospitalization_rate, config.base_testing_rate);
    let p_inf = if shop_open && c[1] > 0 {
        1.0 - (1.0 - sir.beta_transmission).powi(c[1] as i32)
    } else {
        0.0
    };
    let stay = (1.0 - g) * (1.0 - m);
    let per_person: [[f64; 4]; 4] = [
        [1.0 - p_inf, p_inf * (1.0 - tau), p_inf * tau, 0.0],
        [0.0, stay * (1.0 - tau) * (1.0 - h), stay * (1.0 - (1.0 - tau) * (1.0 - h)), g + (1.0 - g) * m],
        [0.0, 0.0, stay, g + (1.0 - g) * m],
        [0.0, 0.0, 0.0, 1.0],
    ];
    let mut dist: HashMap<Counts, f64> = HashMap::from([([0u8; 4], 1.0)]);
    for (k, probs) in per_person.iter().enumerate() {
        for _ in 0..c[k] {
            let mut next: HashMap<Counts, f64> = HashMap::new();
            for (counts, p) in &dist {
                for (j, &q) in probs.iter().enumerate() {
                    if q > 0.0 {
                        let mut n = *counts;
                        n[j] += 1;
                        *next.entry(n).or_default() += p * q;
                    }
                }
            }
            dist = next;
        }
    }
    let mut out: Vec<(Counts, f64)> = dist.into_iter().collect();
    out.sort_by_key(|(c, _)| *c);
    out
}

/// A decision rule over true states, bound to a lock/unlock action pair.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub kind: OracleKind,
    shop: usize,
    lock: usize,
    unlock: usize,
    table: Option<ValueTable>,
    rule: Option<CompiledCaseRule>,
}

impl Oracle {
    pub fn new(
        kind: OracleKind,
        rule: Option<&CaseRule>,
        actions: &[Action],
        config: &CityConfig,
        discount: f64,
    ) -> Result<Self, OracleError> {
        let shop = 0;
        let find = |a: Action| actions.iter().position(|&x| x == a);
        let (lock, unlock) = match (find(Action::lock_shop(shop)), find(Action::unlock_shop(shop))) {
            (Some(l), Some(u)) => (l, u),
            _ => {
                return Err(OracleError::MissingAction {
                    needed: vec![Action::lock_shop(shop).to_string(), Action::unlock_shop(shop).to_string()],
                })
            }
        };
        let table = match kind {
            OracleKind::ValueIteration => Some(ValueTable::solve(config, discount)?),
            _ => None,
        };
        let rule = match (kind, rule) {
            (OracleKind::CaseRule, Some(r)) => Some(CompiledCaseRule {
                clause: Clause::parse(0, &r.clause).map_err(|e| OracleError::Rule(e.to_string()))?,
                min_count: r.min_count,
                quiet_period: r.quiet_period as usize,
            }),
            (OracleKind::CaseRule, None) => return Err(OracleError::Rule("missing [case_rule] section".into())),
            _ => None,
        };
        Ok(Oracle {
            kind,
            shop,
            lock,
            unlock,
            table,
            rule,
        })
    }

    /// Index of the correct action in the action list. `history` holds
    /// the observations so far, the current one last.
    pub fn decide(&self, state: &WorldState, config: &CityConfig, history: &[Observation]) -> Result<usize, OracleError> {
        let lock = match (&self.table, &self.rule) {
            (Some(t), _) => t.prefers_lock(state)?,
            (None, Some(r)) => {
                if history.is_empty() {
                    return Err(OracleError::Undefined {
                        time: state.time,
                        reason: "case rule needs at least one observation".into(),
                    });
                }
                r.locks(history)
            }
            (None, None) => shop_exposure(state, config, self.shop),
        };
        Ok(if lock { self.lock } else { self.unlock })
    }
}
