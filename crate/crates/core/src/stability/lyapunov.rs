//! Lyapunov function for the disease-free equilibrium and a simulation
//! audit of its monotonicity when `R_c < 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::StabilityError;
use crate::model::{control_reproduction_number, disease_free_equilibrium, ModelParameters, StateVector};
use crate::simulation::{integrate, IntegratorConfig, Method};

/// `h(x) = x - 1 - ln x`, nonnegative with its only zero at `x = 1`.
pub fn entropy_h(x: f64) -> Result<f64, StabilityError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(StabilityError::Domain(format!("h(x) needs x > 0, got {x}")));
    }
    let d = x - 1.0;
    // ln_1p keeps the quadratic behaviour near x = 1
    Ok(d - d.ln_1p())
}

/// Coefficients multiplying the linear terms of V.
struct VWeights {
    e1: f64,
    e2: f64,
    i2: f64,
    a: f64,
}

fn weights(p: &ModelParameters) -> VWeights {
    let bs0 = p.beta() * p.s0();
    let (b1, b2, b3) = (p.e2_exit_rate(), p.i2_exit_rate(), p.a_exit_rate());
    let one_minus_rho = 1.0 - p.rho();
    VWeights {
        e1: control_reproduction_number(p),
        e2: bs0 / b1 + bs0 * one_minus_rho / b2 - bs0 * one_minus_rho * p.mu() / (b1 * b2),
        i2: bs0 / b2,
        a: p.omega() * bs0 / b3,
    }
}

/// ```text
/// V = S0 h(S/S0) + R_c E1 + beta S0/(alpha+mu) E2 + omega beta S0/(gamma3+mu) A
///   + beta S0/(gamma2+phi2+mu) [(1-rho) E2 + I2]
///   - beta S0 (1-rho) mu / ((alpha+mu)(gamma2+phi2+mu)) E2
/// ```
pub fn lyapunov_value(state: &StateVector, params: &ModelParameters) -> Result<f64, StabilityError> {
    if !(state.s > 0.0) {
        return Err(StabilityError::Domain(format!("V needs S > 0, got {}", state.s)));
    }
    let s0 = params.s0();
    let w = weights(params);
    Ok(s0 * entropy_h(state.s / s0)? + w.e1 * state.e1 + w.e2 * state.e2 + w.i2 * state.i2 + w.a * state.a)
}

/// Closed form of dV/dt along solutions:
/// `-(mu/S)(S - S0)^2 + (R_c - 1) beta S (E2 + I2 + omega A)`.
pub fn lyapunov_derivative(state: &StateVector, params: &ModelParameters) -> Result<f64, StabilityError> {
    if !(state.s > 0.0) {
        return Err(StabilityError::Domain(format!("dV/dt needs S > 0, got {}", state.s)));
    }
    let s0 = params.s0();
    let rc = control_reproduction_number(params);
    Ok(-params.mu() / state.s * (state.s - s0).powi(2)
        + (rc - 1.0) * params.beta() * state.s * state.infectious_load(params.omega()))
}

/// Outcome of integrating from one initial condition and tracking V.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovAudit {
    pub passed: bool,
    pub horizon: f64,
    pub samples: usize,
    pub v_initial: f64,
    pub v_final: f64,
    /// Largest `(V[k+1] - V[k]) / |V[k]|` over consecutive accepted steps;
    /// nonpositive when V never increased.
    pub worst_relative_increase: f64,
    /// `||x(horizon) - P0||_inf / N(0)`.
    pub final_distance: f64,
}

/// Allowed relative increase of V between consecutive steps.
pub const MONOTONICITY_SLACK: f64 = 1e-9;
/// Solver absolute tolerance for the audit, relative to `N(0)`. Small
/// enough that the decaying infected compartments stay under relative error
/// control instead of hovering around zero, where their noise would swamp V.
pub const AUDIT_ABS_TOL: f64 = 1e-20;
/// Required `||x - P0||_inf / N(0)` at the horizon.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;

/// Horizon long enough for the slow `mu`-rate relaxation of S and R to
/// bring any seeded state within [`CONVERGENCE_TOLERANCE`]: `12 / mu` days.
pub fn default_audit_horizon(params: &ModelParameters) -> f64 {
    12.0 / params.mu()
}

/// Integrate from `initial` to `horizon` and check V is nonincreasing and
/// the state ends near the disease-free equilibrium. Requires `R_c < 1`.
pub fn lyapunov_audit(
    params: &ModelParameters,
    initial: &StateVector,
    horizon: f64,
) -> Result<LyapunovAudit, StabilityError> {
    let rc = control_reproduction_number(params);
    if rc >= 1.0 {
        return Err(StabilityError::Precondition(format!("Lyapunov audit requires R_c < 1, got R_c = {rc}")));
    }
    let abs_tol = AUDIT_ABS_TOL * initial.total().max(1.0);
    let config = IntegratorConfig {
        method: Method::Adaptive { rel_tol: 1e-10, abs_tol: Some(abs_tol) },
        t0: 0.0,
        t_end: horizon,
        day_checkpoints: false,
    };
    let traj = integrate(params, initial, &config)?;
    let values = traj.states().iter().map(|s| lyapunov_value(s, params)).collect::<Result<Vec<_>, _>>()?;

    let worst = values
        .windows(2)
        .map(|w| match w[1] - w[0] {
            d if w[0] != 0.0 => d / w[0].abs(),
            d if d > 0.0 => f64::INFINITY,
            _ => 0.0,
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let n0 = initial.total();
    let dfe = disease_free_equilibrium(params).state;
    let final_distance = traj.final_state().sub(&dfe).max_abs() / n0;
    // a single sample has no increase
    let worst = if values.len() < 2 { 0.0 } else { worst };

    Ok(LyapunovAudit {
        passed: worst <= MONOTONICITY_SLACK && final_distance < CONVERGENCE_TOLERANCE,
        horizon,
        samples: values.len(),
        v_initial: values[0],
        v_final: *values.last().expect("nonempty"),
        worst_relative_increase: worst,
        final_distance,
    })
}

/// `count` seeded initial conditions with population `S0`: a log-uniform
/// fraction in `[1e-4, 1e-2]` of S0 moved out of S and spread at random over
/// E1, E2, I1, I2, A and R.
pub fn audit_initial_conditions(params: &ModelParameters, count: usize, seed: u64) -> Vec<StateVector> {
    let s0 = params.s0();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let frac = 10f64.powf(rng.random_range(-4.0..-2.0));
            let w: [f64; 6] = std::array::from_fn(|_| rng.random_range(0.0..1.0));
            let total: f64 = w.iter().sum();
            let moved = frac * s0;
            let part = |i: usize| moved * w[i] / total;
            StateVector { s: s0 - moved, e1: part(0), e2: part(1), i1: part(2), i2: part(3), a: part(4), r: part(5) }
        })
        .collect()
}

/// Audit several initial conditions concurrently; results keep input order.
pub fn lyapunov_audit_all(
    params: &ModelParameters,
    initials: &[StateVector],
    horizon: f64,
) -> Result<Vec<LyapunovAudit>, StabilityError> {
    initials.par_iter().map(|x| lyapunov_audit(params, x, horizon)).collect()
}

/// Aggregate over several audits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditSummary {
    pub runs: usize,
    pub passed: usize,
    pub worst_relative_increase: f64,
    pub worst_final_distance: f64,
}

impl AuditSummary {
    pub fn from_audits(audits: &[LyapunovAudit]) -> Self {
        AuditSummary {
            runs: audits.len(),
            passed: audits.iter().filter(|a| a.passed).count(),
            worst_relative_increase: audits.iter().map(|a| a.worst_relative_increase).fold(f64::NEG_INFINITY, f64::max),
            worst_final_distance: audits.iter().map(|a| a.final_distance).fold(0.0, f64::max),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.runs
    }
}
