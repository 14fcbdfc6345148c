//! Knowledge-infused policy gradients over relational count features for
//! a simulated pandemic-control problem.

pub mod aggregate;
pub mod engine;
pub mod harness;
pub mod knowledge;
pub mod logic;
pub mod rng;
pub mod scalar;
pub mod sim;

/// Scalar used by the simulator-facing code.
pub type Real = f64;
pub type Model = engine::PolicyModel<Real>;
pub type Sample = engine::GradientSample<Real>;
pub type Features = aggregate::AggregatedFeatures<Real>;
