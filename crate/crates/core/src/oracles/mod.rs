//! Stochastic oracles: noisy gradients, random preconditioners, and exact
//! or stochastic proximity operators.
//!
//! Each oracle family is chosen so its second-moment coefficients are exactly
//! computable, which makes the declared bounds ground truth for the
//! certifier rather than estimates.

mod gradient;
mod preconditioner;
mod prox;

pub use gradient::{
    empirical_moment_check, empirical_moment_check_against, GradientOracle, MomentReport,
};
pub use preconditioner::{PreconditionerModel, SampledOperator};
pub use prox::{exact_prox, ProxOracle};
