//! Expert rules and the ways they enter the functional gradient.

pub mod constraint;
pub mod infuse;

pub use constraint::{applicable, parse_constraint, parse_constraints, write_constraints, ConstraintParseError, FunctionalConstraint, Mode};
pub use infuse::{
    apply_cfg_correction, baseline_gradient, bayes_gradient, cfg_update, default_box, lagrangian, lagrangian_gradient, objective_coefficient,
    solve_constrained_psi, BoxError, ConstrainedPsi, FreePoints, GammaSchedule, InfusionConfig,
};
