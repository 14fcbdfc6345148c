//! Functional policy-gradient learner.

pub mod boost;
pub mod fit;
pub mod io;
pub mod policy;
pub mod refine;
pub mod returns;

pub use boost::{base_gradient, boost, fit_basis, BoostConfig, GradientSample};
pub use fit::{fit_linear, LinearBasis};
pub use io::{read_model, write_model, ModelParseError};
pub use policy::{softmax, softplus, Activation, ActionHead, HiddenUnit, PolicyModel};
pub use refine::{refine_network, RefineConfig};
pub use returns::{estimate_q, Trajectory, DEFAULT_DISCOUNT};
