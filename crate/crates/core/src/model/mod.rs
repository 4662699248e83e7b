//! Parameters, state, vector field, Jacobian, reproduction number and
//! equilibria of the seven-compartment model
//!
//! ```text
//! S' = Lambda - beta S (E2 + I2 + omega A) - mu S
//! E1' = beta S (E2 + I2 + omega A) - (sigma + eps + mu) E1
//! E2' = sigma E1 - (alpha + mu) E2
//! I1' = rho alpha E2 - (gamma1 + phi1 + mu) I1
//! I2' = (1 - rho) alpha E2 - (gamma2 + phi2 + mu) I2
//! A'  = eps E1 - (gamma3 + mu) A
//! R'  = gamma1 I1 + gamma2 I2 + gamma3 A - mu R
//! ```

mod dynamics;
mod equilibrium;
mod params;
mod reproduction;
mod state;

use thiserror::Error;

pub(crate) use dynamics::rhs_raw;
pub use dynamics::{jacobian, population_balance, rhs, Jacobian};
pub use equilibrium::{disease_free_equilibrium, endemic_equilibrium, EquilibriumKind, EquilibriumPoint};
pub use params::{ModelParameters, Param, ParameterSet, Variant};
pub use reproduction::{
    control_reproduction_number, next_generation_matrices, ngm_spectral_radius, ngm_spectral_radius_dense, Matrix5,
};
pub use state::{StateVector, COMPARTMENTS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter {param} = {value}: {reason}")]
    InvalidParameter { param: Param, value: f64, reason: &'static str },
    #[error("unknown parameter name `{0}`")]
    UnknownParameter(String),
    #[error("unknown variant `{0}` (expected 614G, Alpha, Delta or Omicron)")]
    UnknownVariant(String),
    #[error("state component {0} is not finite")]
    NonFinite(&'static str),
    #[error("transition matrix V is singular")]
    SingularTransitionMatrix,
    #[error("eigenvalue iteration did not converge")]
    EigenNonConvergence,
}
