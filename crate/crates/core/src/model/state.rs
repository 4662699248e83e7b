use serde::{Deserialize, Serialize};

use super::ModelError;

/// Compartment labels in canonical order.
pub const COMPARTMENTS: [&str; 7] = ["S", "E1", "E2", "I1", "I2", "A", "R"];

/// One point in the seven-compartment phase space (persons).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateVector {
    pub s: f64,
    pub e1: f64,
    pub e2: f64,
    pub i1: f64,
    pub i2: f64,
    pub a: f64,
    pub r: f64,
}

impl StateVector {
    pub const ZERO: StateVector = StateVector { s: 0.0, e1: 0.0, e2: 0.0, i1: 0.0, i2: 0.0, a: 0.0, r: 0.0 };

    pub fn from_array(x: [f64; 7]) -> Self {
        Self { s: x[0], e1: x[1], e2: x[2], i1: x[3], i2: x[4], a: x[5], r: x[6] }
    }

    pub fn to_array(&self) -> [f64; 7] {
        [self.s, self.e1, self.e2, self.i1, self.i2, self.a, self.r]
    }

    /// Total population N.
    pub fn total(&self) -> f64 {
        self.to_array().iter().sum()
    }

    /// Persons in any infected class (E1, E2, I1, I2, A).
    pub fn infected(&self) -> f64 {
        self.e1 + self.e2 + self.i1 + self.i2 + self.a
    }

    /// Force-of-infection weight `E2 + I2 + omega A`.
    pub fn infectious_load(&self, omega: f64) -> f64 {
        self.e2 + self.i2 + omega * self.a
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn sub(&self, other: &StateVector) -> StateVector {
        let (a, b) = (self.to_array(), other.to_array());
        StateVector::from_array(std::array::from_fn(|i| a[i] - b[i]))
    }

    pub(crate) fn check_finite(&self) -> Result<(), ModelError> {
        match self.to_array().iter().position(|x| !x.is_finite()) {
            Some(i) => Err(ModelError::NonFinite(COMPARTMENTS[i])),
            None => Ok(()),
        }
    }
}
