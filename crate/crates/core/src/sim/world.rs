//! Ground-truth city state and its transition function.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::action::{Action, ActionError, ActionKind};
use super::config::{CityConfig, ConfigError, Location};
use super::observe::{observe, Observation};
use crate::rng::{self, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Health {
    Susceptible,
    Infected,
    Recovered,
    Dead,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Person {
    pub home: usize,
    pub res: usize,
    pub workplace: usize,
    pub health: Health,
    pub hospitalized: bool,
    pub quarantined: bool,
    pub tested_positive: bool,
}

impl Person {
    pub fn is_alive(&self) -> bool {
        self.health != Health::Dead
    }
}

/// One flag per declared lockable location; `true` means locked.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LockFlags {
    pub res: Vec<bool>,
    pub homes: Vec<bool>,
    pub shops: Vec<bool>,
    pub works: Vec<bool>,
    pub routes: Vec<bool>,
}

impl LockFlags {
    pub fn unlocked(config: &CityConfig) -> Self {
        LockFlags {
            res: vec![false; config.n_res],
            homes: vec![false; config.n_homes()],
            shops: vec![false; config.n_shops],
            works: vec![false; config.n_workplaces],
            routes: vec![false; config.route_map.len()],
        }
    }

    /// Hospitals cannot be locked.
    pub fn is_locked(&self, loc: Location) -> bool {
        let i = loc.index();
        match loc {
            Location::Res(_) => self.res[i],
            Location::Home(_) => self.homes[i],
            Location::Shop(_) => self.shops[i],
            Location::Work(_) => self.works[i],
            Location::Route(_) => self.routes[i],
            Location::Hospital(_) => false,
        }
    }

    fn set(&mut self, loc: Location, locked: bool) {
        let i = loc.index();
        match loc {
            Location::Res(_) => self.res[i] = locked,
            Location::Home(_) => self.homes[i] = locked,
            Location::Shop(_) => self.shops[i] = locked,
            Location::Work(_) => self.works[i] = locked,
            Location::Route(_) => self.routes[i] = locked,
            Location::Hospital(_) => {}
        }
    }

    pub fn lock_all(&mut self) {
        for v in [&mut self.res, &mut self.homes, &mut self.shops, &mut self.works, &mut self.routes] {
            v.iter_mut().for_each(|f| *f = true);
        }
    }
}

/// A scripted gathering that pulls people out of their routine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub start_step: usize,
    pub duration: usize,
    pub location: Location,
    pub participant_fraction: f64,
    #[serde(default)]
    pub description: String,
}

impl EventSpec {
    pub fn is_active(&self, time: usize) -> bool {
        time >= self.start_step && time < self.start_step + self.duration
    }

    fn overlaps(&self, other: &EventSpec) -> bool {
        self.location == other.location
            && self.start_step < other.start_step + other.duration
            && other.start_step < self.start_step + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("cannot step past the horizon ({horizon})")]
    PastHorizon { horizon: usize },
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("event at {location} overlaps an existing event there")]
    OverlappingEvent { location: Location },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub time: usize,
    pub persons: Vec<Person>,
    pub locks: LockFlags,
    pub testing_rate: f64,
    pub events: Vec<EventSpec>,
}

/// Result of one transition.
#[derive(Debug, Clone)]
pub struct Step {
    pub state: WorldState,
    pub reward: f64,
    pub observation: Observation,
    pub new_infections: usize,
    pub new_deaths: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Census {
    pub susceptible: usize,
    pub infected: usize,
    pub recovered: usize,
    pub dead: usize,
    pub hospitalized: usize,
    pub tested_positive: usize,
}

impl Census {
    pub fn total(&self) -> usize {
        self.susceptible + self.infected + self.recovered + self.dead
    }
}

/// Deterministic initial state: everyone susceptible and every location
/// open, except a seeded set of initially infected persons.
pub fn init_city(config: &CityConfig) -> Result<WorldState, ConfigError> {
    config.validate()?;
    let pop = config.population();
    let mut persons: Vec<Person> = (0..pop)
        .map(|p| {
            let home = p / config.n_persons_per_home;
            Person {
                home,
                res: home / config.n_homes_per_res,
                workplace: p % config.n_workplaces,
                health: Health::Susceptible,
                hospitalized: false,
                quarantined: false,
                tested_positive: false,
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..pop).collect();
    order.sort_by_key(|&p| rng::hash_key(&[config.seed, stream::SEEDING, p as u64]));
    for &p in order.iter().take(config.initial_infected()) {
        persons[p].health = Health::Infected;
    }
    Ok(WorldState {
        time: 0,
        persons,
        locks: LockFlags::unlocked(config),
        testing_rate: config.base_testing_rate,
        events: Vec::new(),
    })
}

impl WorldState {
    pub fn census(&self) -> Census {
        let mut c = Census::default();
        for p in &self.persons {
            match p.health {
                Health::Susceptible => c.susceptible += 1,
                Health::Infected => c.infected += 1,
                Health::Recovered => c.recovered += 1,
                Health::Dead => c.dead += 1,
            }
            c.hospitalized += p.hospitalized as usize;
            c.tested_positive += p.tested_positive as usize;
        }
        c
    }

    /// Registers an event; at most one event per location at a time.
    pub fn inject_event(&mut self, event: EventSpec, config: &CityConfig) -> Result<(), SimError> {
        if event.duration == 0 {
            return Err(SimError::InvalidEvent("duration must be at least 1".into()));
        }
        if !(event.participant_fraction > 0.0 && event.participant_fraction <= 1.0) {
            return Err(SimError::InvalidEvent(format!(
                "participant_fraction {} is not in (0, 1]",
                event.participant_fraction
            )));
        }
        if event.start_step + event.duration > config.horizon {
            return Err(SimError::InvalidEvent(format!(
                "event ends at step {} past the horizon {}",
                event.start_step + event.duration,
                config.horizon
            )));
        }
        if !config.is_declared(event.location) || matches!(event.location, Location::Route(_)) {
            return Err(SimError::InvalidEvent(format!(
                "{} is not a declared venue",
                event.location
            )));
        }
        if self.events.iter().any(|e| e.overlaps(&event)) {
            return Err(SimError::OverlappingEvent {
                location: event.location,
            });
        }
        self.events.push(event);
        Ok(())
    }

    fn apply_action(&mut self, action: Action) {
        match action.kind {
            ActionKind::IncreaseTesting => {
                self.testing_rate = (self.testing_rate + 0.10).min(1.0);
            }
            ActionKind::NilPolicy => {}
            kind => {
                let target = action.target.expect("validated action has a target");
                self.locks.set(target, kind.is_lock());
            }
        }
    }

    /// Venues each person attends this step (empty when confined).
    fn attendance(&self, config: &CityConfig) -> Vec<Vec<Location>> {
        let active: Vec<(usize, &EventSpec)> = self
            .events
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_active(self.time))
            .collect();
        self.persons
            .iter()
            .enumerate()
            .map(|(pid, p)| {
                if !p.is_alive() || p.hospitalized {
                    return Vec::new();
                }
                for &(eid, ev) in &active {
                    let draw = rng::unit(&[config.seed, stream::EVENT, eid as u64, pid as u64]);
                    if draw < ev.participant_fraction {
                        return if self.locks.is_locked(ev.location) {
                            Vec::new()
                        } else {
                            vec![ev.location]
                        };
                    }
                }
                if p.quarantined || self.locks.homes[p.home] || self.locks.res[p.res] {
                    return Vec::new();
                }
                let res = Location::Res(p.res);
                let mut venues = Vec::with_capacity(2);
                for venue in [
                    Location::Shop(config.shop_of_res(p.res)),
                    Location::Work(p.workplace),
                ] {
                    let route_locked = config
                        .route_between(res, venue)
                        .is_some_and(|r| self.locks.routes[r]);
                    if !self.locks.is_locked(venue) && !route_locked {
                        venues.push(venue);
                    }
                }
                venues
            })
            .collect()
    }
}

/// Advances one step: apply the action, mix at venues, infect, test, then
/// progress disease for those infected before this step.
pub fn step(state: &WorldState, action: Action, config: &CityConfig) -> Result<Step, SimError> {
    if state.time >= config.horizon {
        return Err(SimError::PastHorizon {
            horizon: config.horizon,
        });
    }
    action.validate(config)?;
    let mut next = state.clone();
    next.apply_action(action);
    let t = next.time as u64;
    let seed = config.seed;
    let beta = config.sir.beta_transmission;

    let attendance = next.attendance(config);
    let mut infectious_at: BTreeMap<Location, usize> = BTreeMap::new();
    for (p, venues) in next.persons.iter().zip(&attendance) {
        if p.health == Health::Infected {
            for v in venues {
                *infectious_at.entry(*v).or_default() += 1;
            }
        }
    }

    let was_infected: Vec<bool> = next
        .persons
        .iter()
        .map(|p| p.health == Health::Infected)
        .collect();

    let mut new_infections = 0;
    for (pid, (p, venues)) in next.persons.iter_mut().zip(&attendance).enumerate() {
        if p.health != Health::Susceptible {
            continue;
        }
        let contacts: usize = venues.iter().map(|v| infectious_at.get(v).copied().unwrap_or(0)).sum();
        if contacts == 0 {
            continue;
        }
        let p_escape = (1.0 - beta).powi(contacts as i32);
        if rng::unit(&[seed, t, pid as u64, stream::INFECTION]) >= p_escape {
            p.health = Health::Infected;
            new_infections += 1;
        }
    }

    for (pid, p) in next.persons.iter_mut().enumerate() {
        if p.health == Health::Infected
            && !p.tested_positive
            && rng::unit(&[seed, t, pid as u64, stream::TESTING]) < next.testing_rate
        {
            p.tested_positive = true;
            p.quarantined = true;
        }
    }

    let capacity = config.hospital_capacity();
    let mut occupancy = next.persons.iter().filter(|p| p.hospitalized).count();
    let mut new_deaths = 0;
    for (pid, p) in next.persons.iter_mut().enumerate() {
        if !was_infected[pid] {
            continue;
        }
        let key = |s: u64| rng::unit(&[seed, t, pid as u64, s]);
        if key(stream::RECOVERY) < config.sir.gamma_recovery {
            p.health = Health::Recovered;
            if p.hospitalized {
                occupancy -= 1;
            }
            p.hospitalized = false;
            p.quarantined = false;
        } else if key(stream::DEATH) < config.sir.mortality {
            p.health = Health::Dead;
            if p.hospitalized {
                occupancy -= 1;
            }
            p.hospitalized = false;
            p.quarantined = false;
            new_deaths += 1;
        } else if !p.hospitalized && occupancy < capacity && key(stream::HOSPITAL) < config.hospitalization_rate {
            p.hospitalized = true;
            occupancy += 1;
        }
    }

    next.time += 1;
    let observation = observe(&next, config);
    Ok(Step {
        state: next,
        reward: -(new_deaths as f64),
        observation,
        new_infections,
        new_deaths,
    })
}
