//! Agent-based SIR city simulator with lockdown and testing interventions.

pub mod action;
pub mod config;
pub mod observe;
pub mod world;

pub use action::{Action, ActionError, ActionKind};
pub use config::{CityConfig, ConfigError, Location, SirParams};
pub use observe::{observe, Observation};
pub use world::{init_city, step, Census, EventSpec, Health, LockFlags, Person, SimError, Step, WorldState};

use serde::Serialize;

/// One line of a trajectory dump.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRecord {
    pub time: usize,
    pub action: Action,
    pub reward: f64,
    pub observed_positive_count: usize,
}

/// CSV, one record per line with a header row.
pub fn write_trajectory(records: &[TrajectoryRecord]) -> String {
    let mut wtr = csv::WriterBuilder::new().from_writer(Vec::new());
    for r in records {
        wtr.serialize(r).expect("in-memory csv write");
    }
    String::from_utf8(wtr.into_inner().expect("flush")).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn micro(beta: f64) -> CityConfig {
        let mut cfg = CityConfig::micro(7);
        cfg.sir = SirParams {
            beta_transmission: beta,
            gamma_recovery: 0.0,
            mortality: 0.0,
        };
        cfg.hospitalization_rate = 0.0;
        cfg.base_testing_rate = 0.0;
        cfg
    }

    #[test]
    fn init_is_deterministic() {
        let cfg = CityConfig::micro(7);
        assert_eq!(init_city(&cfg).unwrap(), init_city(&cfg).unwrap());
        assert_eq!(init_city(&cfg).unwrap().census().infected, 1);
    }

    #[test]
    fn beta_one_infects_every_shopper() {
        let cfg = micro(1.0);
        let s0 = init_city(&cfg).unwrap();
        let out = step(&s0, Action::NIL, &cfg).unwrap();
        assert_eq!(out.new_infections, 3);
        assert_eq!(out.state.census().infected, 4);
    }

    #[test]
    fn beta_zero_never_spreads() {
        let cfg = micro(0.0);
        let mut s = init_city(&cfg).unwrap();
        for _ in 0..cfg.horizon {
            let out = step(&s, Action::NIL, &cfg).unwrap();
            assert_eq!(out.new_infections, 0);
            s = out.state;
        }
    }

    #[test]
    fn all_locked_has_no_contacts() {
        let cfg = micro(1.0);
        let mut s = init_city(&cfg).unwrap();
        s.locks.lock_all();
        let out = step(&s, Action::NIL, &cfg).unwrap();
        assert_eq!(out.new_infections, 0);
    }

    #[test]
    fn locked_shop_still_mixes_at_work() {
        let cfg = micro(1.0);
        let s0 = init_city(&cfg).unwrap();
        let out = step(&s0, Action::lock_shop(0), &cfg).unwrap();
        assert!(out.state.locks.shops[0]);
        assert_eq!(out.new_infections, 3);
    }

    #[test]
    fn stepping_past_horizon_fails() {
        let mut cfg = micro(0.0);
        cfg.horizon = 1;
        let s0 = init_city(&cfg).unwrap();
        let s1 = step(&s0, Action::NIL, &cfg).unwrap().state;
        assert!(matches!(step(&s1, Action::NIL, &cfg), Err(SimError::PastHorizon { .. })));
    }

    #[test]
    fn undeclared_target_is_rejected() {
        let cfg = micro(0.0);
        let s0 = init_city(&cfg).unwrap();
        assert!(matches!(
            step(&s0, Action::lock_shop(4), &cfg),
            Err(SimError::Action(ActionError::Undeclared(_)))
        ));
    }

    #[test]
    fn increase_testing_caps_at_one() {
        let cfg = micro(0.0);
        let mut s = init_city(&cfg).unwrap();
        s.testing_rate = 0.95;
        let a = Action::new(ActionKind::IncreaseTesting, None).unwrap();
        let s = step(&s, a, &cfg).unwrap().state;
        assert_eq!(s.testing_rate, 1.0);
        let mut s = init_city(&cfg).unwrap();
        s.testing_rate = 0.2;
        let s = step(&s, a, &cfg).unwrap().state;
        assert!((s.testing_rate - 0.3).abs() < 1e-12);
    }

    fn gathering(fraction: f64) -> EventSpec {
        EventSpec {
            start_step: 0,
            duration: 1,
            location: Location::Res(0),
            participant_fraction: fraction,
            description: "rally".into(),
        }
    }

    #[test]
    fn event_mixes_despite_routine_locks() {
        let mut cfg = micro(1.0);
        cfg.n_homes_per_res = 1;
        cfg.n_persons_per_home = 3;
        let mut s = init_city(&cfg).unwrap();
        s.locks.shops[0] = true;
        s.locks.works[0] = true;
        s.inject_event(gathering(1.0), &cfg).unwrap();
        let out = step(&s, Action::NIL, &cfg).unwrap();
        assert_eq!(out.new_infections, 2);
    }

    #[test]
    fn locked_event_site_suppresses_gathering() {
        let mut cfg = micro(1.0);
        cfg.n_homes_per_res = 1;
        cfg.n_persons_per_home = 3;
        let mut s = init_city(&cfg).unwrap();
        s.locks.shops[0] = true;
        s.locks.works[0] = true;
        s.locks.res[0] = true;
        s.inject_event(gathering(1.0), &cfg).unwrap();
        let out = step(&s, Action::NIL, &cfg).unwrap();
        assert_eq!(out.new_infections, 0);
    }

    #[test]
    fn event_validation() {
        let cfg = micro(1.0);
        let mut s = init_city(&cfg).unwrap();
        let mut e = gathering(1.0);
        e.duration = 0;
        assert!(matches!(s.inject_event(e, &cfg), Err(SimError::InvalidEvent(_))));
        let mut e = gathering(0.0);
        e.duration = 2;
        assert!(s.inject_event(e, &cfg).is_err());
        let mut e = gathering(0.5);
        e.start_step = cfg.horizon;
        assert!(s.inject_event(e, &cfg).is_err());
        s.inject_event(gathering(0.5), &cfg).unwrap();
        assert!(matches!(
            s.inject_event(gathering(0.3), &cfg),
            Err(SimError::OverlappingEvent { .. })
        ));
        let mut later = gathering(0.3);
        later.start_step = 1;
        s.inject_event(later, &cfg).unwrap();
    }

    #[test]
    fn observation_mirrors_shop_flag() {
        let cfg = micro(0.0);
        let mut s = init_city(&cfg).unwrap();
        let shop = crate::logic::Entity::new(crate::logic::EntityType::Shop, 0);
        assert_eq!(observe(&s, &cfg).facts.tuples(crate::logic::Pred::Sopen).len(), 1);
        assert!(observe(&s, &cfg).facts.contains(crate::logic::Pred::Sopen, &[shop]));
        s.locks.shops[0] = true;
        assert!(observe(&s, &cfg).facts.tuples(crate::logic::Pred::Sopen).is_empty());
    }

    #[test]
    fn testing_visibility() {
        let mut cfg = CityConfig::micro(3);
        cfg.base_testing_rate = 1.0;
        let mut s = init_city(&cfg).unwrap();
        let mut ever_infected = s.census().infected;
        for _ in 0..10 {
            let out = step(&s, Action::NIL, &cfg).unwrap();
            ever_infected += out.new_infections;
            s = out.state;
            assert_eq!(out.observation.observed_positive_count, ever_infected);
        }
        cfg.base_testing_rate = 0.0;
        let mut s = init_city(&cfg).unwrap();
        for _ in 0..10 {
            let out = step(&s, Action::NIL, &cfg).unwrap();
            s = out.state;
            assert_eq!(out.observation.observed_positive_count, 0);
        }
    }

    #[test]
    fn trajectory_dump_has_header_and_rows() {
        let recs = vec![TrajectoryRecord {
            time: 0,
            action: Action::lock_shop(0),
            reward: -1.0,
            observed_positive_count: 2,
        }];
        let text = write_trajectory(&recs);
        assert_eq!(text, "time,action,reward,observed_positive_count\n0,LockShop:shop0,-1.0,2\n");
    }
}
