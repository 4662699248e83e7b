use serde::Serialize;

use crate::model::StateVector;

/// Cumulative inflows since `t0`: into I1 (`int rho alpha E2`), I2
/// (`int (1-rho) alpha E2`) and A (`int eps E1`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Inflows {
    pub i1: f64,
    pub i2: f64,
    pub a: f64,
}

impl Inflows {
    pub fn total(&self) -> f64 {
        self.i1 + self.i2 + self.a
    }
}

/// Accepted integration points. Immutable once returned by `integrate`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    t0: f64,
    times: Vec<f64>,
    states: Vec<StateVector>,
    inflows: Vec<Inflows>,
    /// index into `times` of day 0, 1, 2, ...
    day_index: Vec<usize>,
}

impl Trajectory {
    pub(super) fn with_start(t0: f64) -> Self {
        Self { t0, times: Vec::new(), states: Vec::new(), inflows: Vec::new(), day_index: Vec::new() }
    }

    pub(super) fn push(&mut self, t: f64, y: &[f64; 10], is_checkpoint: bool) {
        if is_checkpoint {
            self.day_index.push(self.times.len());
        }
        self.times.push(t);
        self.states.push(StateVector::from_array(std::array::from_fn(|i| y[i])));
        self.inflows.push(Inflows { i1: y[7], i2: y[8], a: y[9] });
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn inflows(&self) -> &[Inflows] {
        &self.inflows
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory holds at least the initial point")
    }

    pub fn final_inflows(&self) -> &Inflows {
        self.inflows.last().expect("trajectory holds at least the initial point")
    }

    /// Number of whole days covered by checkpoints.
    pub fn day_count(&self) -> usize {
        self.day_index.len().saturating_sub(1)
    }

    pub fn time_at_day(&self, day: usize) -> Option<f64> {
        self.day_index.get(day).map(|&i| self.times[i])
    }

    pub fn state_at_day(&self, day: usize) -> Option<&StateVector> {
        self.day_index.get(day).map(|&i| &self.states[i])
    }

    pub fn inflows_at_day(&self, day: usize) -> Option<&Inflows> {
        self.day_index.get(day).map(|&i| &self.inflows[i])
    }
}
