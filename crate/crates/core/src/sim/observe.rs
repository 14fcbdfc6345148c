//! Partially observed snapshot handed to the agent.

use super::config::{CityConfig, Location};
use super::world::{LockFlags, WorldState};
use crate::logic::{Entity, EntityType, FactBase, Pred};

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub time: usize,
    pub facts: FactBase,
    /// Persons ever detected by testing.
    pub observed_positive_count: usize,
    pub locks: LockFlags,
}

fn place_entity(loc: Location) -> Entity {
    let ty = match loc {
        Location::Res(_) => EntityType::Res,
        Location::Shop(_) => EntityType::Shop,
        Location::Work(_) => EntityType::Work,
        Location::Home(_) => EntityType::Home,
        Location::Route(_) => EntityType::Route,
        Location::Hospital(_) => EntityType::Place,
    };
    Entity::new(ty, loc.index() as u32)
}

/// Ground literals for the nine schema predicates. Infection status is
/// only visible through `quarantined` (detected cases) and `hospitalized`.
/// `same` is symmetric; `pin` lists living persons who are not in hospital.
pub fn observe(state: &WorldState, config: &CityConfig) -> Observation {
    let mut facts = FactBase::new();
    for &(a, b) in &config.route_map {
        let (a, b) = (place_entity(a), place_entity(b));
        facts.insert(Pred::Same, &[a, b]);
        facts.insert(Pred::Same, &[b, a]);
    }
    for home in 0..config.n_homes() {
        let res = home / config.n_homes_per_res;
        facts.insert(
            Pred::Hin,
            &[Entity::new(EntityType::Home, home as u32), Entity::new(EntityType::Res, res as u32)],
        );
        if !state.locks.homes[home] {
            facts.insert(Pred::Hopen, &[Entity::new(EntityType::Home, home as u32)]);
        }
    }
    let unary_open = [
        (Pred::Ropen, EntityType::Res, &state.locks.res),
        (Pred::Sopen, EntityType::Shop, &state.locks.shops),
        (Pred::Wopen, EntityType::Work, &state.locks.works),
    ];
    for (pred, ty, flags) in unary_open {
        for (i, &locked) in flags.iter().enumerate() {
            if !locked {
                facts.insert(pred, &[Entity::new(ty, i as u32)]);
            }
        }
    }
    for (pid, p) in state.persons.iter().enumerate() {
        let person = Entity::new(EntityType::Person, pid as u32);
        if p.is_alive() && !p.hospitalized {
            facts.insert(Pred::Pin, &[person, Entity::new(EntityType::Home, p.home as u32)]);
        }
        if p.hospitalized {
            facts.insert(Pred::Hospitalized, &[person]);
        }
        if p.quarantined {
            facts.insert(Pred::Quarantined, &[person]);
        }
    }
    Observation {
        time: state.time,
        facts,
        observed_positive_count: state.persons.iter().filter(|p| p.tested_positive).count(),
        locks: state.locks.clone(),
    }
}
