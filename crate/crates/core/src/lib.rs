//! Compartmental dynamics of an epidemic with a non-infectious early
//! exposure stage, an infectious late exposure stage, detected and
//! undetected symptomatic cases, and asymptomatic carriers.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod model;
pub mod scenario;
pub mod simulation;
pub mod stability;

#[cfg(test)]
mod testutil;
