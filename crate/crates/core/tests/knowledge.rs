use kipg_core::engine::{GradientSample, PolicyModel};
use kipg_core::knowledge::{
    applicable, apply_cfg_correction, parse_constraints, solve_constrained_psi, FreePoints, FunctionalConstraint, Mode,
};
use kipg_core::sim::{init_city, observe, Action, CityConfig};

const RULES: &str = "
lockshop(State,Shop) :- sopen(State,Shop) , omega=-1 , alpha=1 , mode=soft
lockshop(State,Shop) :- hospitalized(State,Person) , omega=+1 , alpha=1 , mode=hard
lockshop(State,Shop) :- quarantined(State,P) ^ sopen(State,S) , omega=2 , alpha=1 , mode=soft
";

#[test]
fn rules_fire_on_simulated_observations() {
    let fcs = parse_constraints(RULES).unwrap();
    let cfg = CityConfig::micro(4);
    let mut state = init_city(&cfg).unwrap();
    assert_eq!(applicable(&fcs, &observe(&state, &cfg)), vec![0]);
    state.persons[0].hospitalized = true;
    state.persons[1].quarantined = true;
    assert_eq!(applicable(&fcs, &observe(&state, &cfg)), vec![0, 1, 2]);
    state.locks.shops[0] = true;
    assert_eq!(applicable(&fcs, &observe(&state, &cfg)), vec![1]);
}

#[test]
fn full_step_projection_lands_on_the_rule_value() {
    let fcs = parse_constraints(RULES).unwrap();
    let hard: Vec<&FunctionalConstraint> = fcs.iter().filter(|f| f.mode == Mode::Hard).collect();
    let actions = [Action::lock_shop(0), Action::unlock_shop(0)];
    let mut model = PolicyModel::<f64>::new(&actions, 2);
    let samples: Vec<GradientSample<f64>> = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 0.5]]
        .iter()
        .map(|x| GradientSample::new(&model, x.to_vec(), 0, -1.0))
        .collect();
    let app: Vec<Vec<&FunctionalConstraint>> = vec![hard.clone(), hard.clone(), hard.clone(), hard];
    let star = solve_constrained_psi(&samples, 0, &app, 10.0, FreePoints::Keep).unwrap();
    assert!(star.values.iter().all(|&v| v == 1.0));
    apply_cfg_correction(&mut model, &samples, 0, &star.values, 1.0, 1e-6).unwrap();
    for s in &samples {
        assert!((model.psi_action(0, &s.features) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn box_must_exceed_every_omega() {
    let fcs = parse_constraints("lockshop(State,Shop) :- true , omega=20 , alpha=1 , mode=hard").unwrap();
    let model = PolicyModel::<f64>::new(&[Action::lock_shop(0)], 1);
    let samples = vec![GradientSample::new(&model, vec![1.0], 0, -1.0)];
    let err = solve_constrained_psi(&samples, 0, &[vec![&fcs[0]]], 10.0, FreePoints::BoxVertex).unwrap_err();
    assert_eq!(err.max_omega, 20.0);
}
