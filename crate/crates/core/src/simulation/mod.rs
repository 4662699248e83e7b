//! Time integration of the model and the observables derived from it.
//!
//! Three cumulative inflow counters (into I1, I2 and A) are integrated
//! alongside the seven compartments, so incidence is a difference of
//! integrated states rather than a point sample of `rho alpha E2`.
//! With day checkpoints on, every integer day after `t0` is hit exactly.

mod integrator;
mod observables;
mod trajectory;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{rhs_raw, ModelParameters, StateVector, COMPARTMENTS};
use integrator::{dopri_step, initial_step, rk4_step};

pub use observables::{cumulative_by_class, daily_incidence, peak, ClassShares, ClassTotals, IncidenceSeries, Peak};
pub use trajectory::{Inflows, Trajectory};

/// Number of integrated components: seven compartments plus three counters.
const DIM: usize = 10;

const MAX_STEPS: usize = 50_000_000;
const MAX_CONSECUTIVE_REJECTIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with a fixed step (days).
    Rk4 { step: f64 },
    /// Dormand-Prince 5(4). `abs_tol = None` means `1e-10 * N(0)`.
    Adaptive { rel_tol: f64, abs_tol: Option<f64> },
}

impl Method {
    pub fn rk4(step: f64) -> Self {
        Method::Rk4 { step }
    }
}

impl Default for Method {
    fn default() -> Self {
        Method::Adaptive { rel_tol: 1e-8, abs_tol: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t0: f64,
    pub t_end: f64,
    /// Land a step on every integer day after `t0`. Needed for incidence.
    pub day_checkpoints: bool,
}

impl IntegratorConfig {
    /// Default adaptive integrator over `[0, days]` with day checkpoints.
    pub fn days(days: f64) -> Self {
        Self { method: Method::default(), t0: 0.0, t_end: days, day_checkpoints: true }
    }

    pub fn with_method(self, method: Method) -> Self {
        Self { method, ..self }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |m: &str| Err(SimulationError::InvalidConfig(m.to_string()));
        if !self.t0.is_finite() || !self.t_end.is_finite() {
            return bad("t0 and t_end must be finite");
        }
        if self.t_end <= self.t0 {
            return bad("t_end must exceed t0");
        }
        match self.method {
            Method::Rk4 { step } if !(step > 0.0 && step.is_finite()) => bad("step must be positive"),
            Method::Adaptive { rel_tol, abs_tol } => {
                if !(rel_tol > 0.0 && rel_tol.is_finite()) {
                    return bad("rel_tol must be positive");
                }
                match abs_tol {
                    Some(a) if !(a > 0.0 && a.is_finite()) => bad("abs_tol must be positive"),
                    _ => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("initial state is invalid: {0}")]
    InvalidInitialState(String),
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("compartment {compartment} = {value} fell below the nonnegativity band at t = {t}")]
    NegativeState { t: f64, compartment: &'static str, value: f64 },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("too many consecutive step rejections at t = {t}")]
    TooManyRejections { t: f64 },
    #[error("step limit exceeded at t = {t}")]
    StepLimit { t: f64 },
    #[error("trajectory has no day checkpoints")]
    NotDayAligned,
    #[error("trajectory spans less than one whole day")]
    TooShort,
    #[error("incidence series is empty")]
    EmptySeries,
}

impl SimulationError {
    /// Time of failure for errors raised during stepping.
    pub fn failure_time(&self) -> Option<f64> {
        match *self {
            SimulationError::NonFinite { t }
            | SimulationError::NegativeState { t, .. }
            | SimulationError::StepSizeUnderflow { t }
            | SimulationError::TooManyRejections { t }
            | SimulationError::StepLimit { t } => Some(t),
            _ => None,
        }
    }
}

/// Model vector field extended with the cumulative inflow counters.
#[inline]
fn augmented_rhs(y: &[f64; DIM], p: &ModelParameters) -> [f64; DIM] {
    let x: [f64; 7] = std::array::from_fn(|i| y[i]);
    let d = rhs_raw(&x, p);
    let (e1, e2) = (y[1], y[2]);
    let to_symptomatic = p.alpha() * e2;
    [
        d[0],
        d[1],
        d[2],
        d[3],
        d[4],
        d[5],
        d[6],
        p.rho() * to_symptomatic,
        (1.0 - p.rho()) * to_symptomatic,
        p.epsilon() * e1,
    ]
}

struct Recorder {
    traj: Trajectory,
    negative_floor: f64,
}

impl Recorder {
    fn push(&mut self, t: f64, y: &[f64; DIM], is_checkpoint: bool) -> Result<(), SimulationError> {
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SimulationError::NonFinite { t });
        }
        if let Some(i) = (0..7).find(|&i| y[i] < self.negative_floor) {
            return Err(SimulationError::NegativeState { t, compartment: COMPARTMENTS[i], value: y[i] });
        }
        self.traj.push(t, y, is_checkpoint);
        Ok(())
    }
}

/// Integrate the model from `initial` over `[t0, t_end]`.
///
/// Every accepted step is recorded. A compartment dropping below
/// `-1e-9 N(0)` aborts the run instead of being clipped.
pub fn integrate(
    params: &ModelParameters,
    initial: &StateVector,
    config: &IntegratorConfig,
) -> Result<Trajectory, SimulationError> {
    config.validate()?;
    let x0 = initial.to_array();
    if let Some(i) = x0.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(SimulationError::InvalidInitialState(format!("{} = {}", COMPARTMENTS[i], x0[i])));
    }
    let n0 = initial.total();
    let mut y = [0.0; DIM];
    y[..7].copy_from_slice(&x0);

    let mut rec = Recorder { traj: Trajectory::with_start(config.t0), negative_floor: -1e-9 * n0 };
    rec.push(config.t0, &y, config.day_checkpoints)?;

    let f = |z: &[f64; DIM]| augmented_rhs(z, params);
    let segments = segment_ends(config);

    match config.method {
        Method::Rk4 { step } => {
            let mut t = config.t0;
            let mut steps = 0usize;
            for (seg_end, is_checkpoint) in segments {
                let start = t;
                let n = ((seg_end - start) / step - 1e-9).ceil().max(1.0) as usize;
                for k in 1..=n {
                    let t_next = if k == n { seg_end } else { start + k as f64 * step };
                    y = rk4_step(&f, &y, t_next - t);
                    t = t_next;
                    steps += 1;
                    if steps > MAX_STEPS {
                        return Err(SimulationError::StepLimit { t });
                    }
                    rec.push(t, &y, k == n && is_checkpoint)?;
                }
            }
        }
        Method::Adaptive { rel_tol, abs_tol } => {
            let atol = abs_tol.unwrap_or(1e-10 * n0.max(1.0));
            let mut t = config.t0;
            let mut fy = f(&y);
            let mut h = initial_step(&f, &y, &fy, atol, rel_tol).min(config.t_end - config.t0);
            let mut steps = 0usize;
            for (seg_end, is_checkpoint) in segments {
                let mut rejections = 0usize;
                while t < seg_end {
                    let remaining = seg_end - t;
                    // avoid leaving a sliver shorter than a tiny fraction of h
                    let last = h >= remaining * (1.0 - 1e-12);
                    let h_try = if last { remaining } else { h };
                    if h_try <= 1e-12 * t.abs().max(1.0) {
                        return Err(SimulationError::StepSizeUnderflow { t });
                    }
                    let st = dopri_step(&f, &y, &fy, h_try, atol, rel_tol);
                    let factor = if st.err == 0.0 { 5.0 } else { (0.9 * st.err.powf(-0.2)).clamp(0.2, 5.0) };
                    if st.err <= 1.0 && st.y.iter().all(|v| v.is_finite()) {
                        t = if last { seg_end } else { t + h_try };
                        y = st.y;
                        fy = st.f_new;
                        rec.push(t, &y, last && is_checkpoint)?;
                        steps += 1;
                        if steps > MAX_STEPS {
                            return Err(SimulationError::StepLimit { t });
                        }
                        rejections = 0;
                        // a step clipped to the boundary says nothing about the natural step
                        if !last || h_try >= h {
                            h = h_try * factor;
                        }
                    } else {
                        rejections += 1;
                        if rejections > MAX_CONSECUTIVE_REJECTIONS {
                            return Err(SimulationError::TooManyRejections { t });
                        }
                        h = h_try * factor.min(1.0).max(if st.err.is_finite() { 0.2 } else { 0.1 });
                    }
                }
            }
        }
    }
    Ok(rec.traj)
}

/// Segment end times and whether each is a day checkpoint.
fn segment_ends(config: &IntegratorConfig) -> Vec<(f64, bool)> {
    if !config.day_checkpoints {
        return vec![(config.t_end, false)];
    }
    let whole_days = ((config.t_end - config.t0) + 1e-9).floor() as usize;
    let mut ends: Vec<(f64, bool)> = (1..=whole_days).map(|d| (config.t0 + d as f64, true)).collect();
    match ends.last() {
        Some(&(t, _)) if (config.t_end - t).abs() <= 1e-9 => {
            if let Some(last) = ends.last_mut() {
                last.0 = config.t_end.max(t);
            }
        }
        _ => ends.push((config.t_end, false)),
    }
    ends
}

/// DFE with `e1` persons moved from S into E1.
pub fn seeded_state(params: &ModelParameters, e1: f64) -> StateVector {
    StateVector { s: params.s0() - e1, e1, ..StateVector::ZERO }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{disease_free_equilibrium, population_balance, Variant};

    fn g614() -> ModelParameters {
        Variant::G614.parameters()
    }

    #[test]
    fn config_validation() {
        let mut c = IntegratorConfig::days(10.0);
        assert!(c.validate().is_ok());
        c.t_end = 0.0;
        assert!(c.validate().is_err());
        let c = IntegratorConfig::days(10.0).with_method(Method::rk4(0.0));
        assert!(c.validate().is_err());
        let c = IntegratorConfig::days(10.0).with_method(Method::Adaptive { rel_tol: 1e-8, abs_tol: Some(-1.0) });
        assert!(c.validate().is_err());
    }

    #[test]
    fn negative_initial_state_rejected() {
        let bad = StateVector { e1: -1.0, ..seeded_state(&g614(), 0.0) };
        assert!(matches!(
            integrate(&g614(), &bad, &IntegratorConfig::days(1.0)),
            Err(SimulationError::InvalidInitialState(_))
        ));
    }

    #[test]
    fn dfe_stays_put() {
        let p = g614();
        let dfe = disease_free_equilibrium(&p).state;
        for method in [Method::default(), Method::rk4(0.01)] {
            let traj = integrate(&p, &dfe, &IntegratorConfig::days(50.0).with_method(method)).unwrap();
            for s in traj.states() {
                assert_eq!(*s, dfe);
            }
        }
    }

    #[test]
    fn checkpoints_hit_every_day() {
        let p = g614();
        let traj = integrate(&p, &seeded_state(&p, 100.0), &IntegratorConfig::days(30.0)).unwrap();
        assert_eq!(traj.day_count(), 30);
        for d in 0..=30 {
            assert_eq!(traj.time_at_day(d).unwrap(), d as f64);
        }
        let rk = IntegratorConfig::days(3.0).with_method(Method::rk4(0.3));
        let traj = integrate(&p, &seeded_state(&p, 100.0), &rk).unwrap();
        assert_eq!(traj.day_count(), 3);
        assert_eq!(traj.time_at_day(2).unwrap(), 2.0);
        assert!(traj.times().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn fractional_end_is_reached() {
        let p = g614();
        let c = IntegratorConfig { t_end: 2.5, ..IntegratorConfig::days(0.0) };
        let traj = integrate(&p, &seeded_state(&p, 100.0), &c).unwrap();
        assert_eq!(*traj.times().last().unwrap(), 2.5);
        assert_eq!(traj.day_count(), 2);
    }

    #[test]
    fn halving_fixed_step_barely_moves_endpoint() {
        let p = g614();
        let x0 = seeded_state(&p, 1000.0);
        let run = |h: f64| {
            let c = IntegratorConfig::days(120.0).with_method(Method::rk4(h));
            *integrate(&p, &x0, &c).unwrap().final_state()
        };
        let (a, b) = (run(0.01), run(0.005));
        for (u, v) in a.to_array().iter().zip(b.to_array()) {
            assert!((u - v).abs() <= 1e-6 * v.abs().max(1.0), "{u} vs {v}");
        }
    }

    #[test]
    fn population_bounded_by_disease_free_level() {
        let p = g614();
        let x0 = seeded_state(&p, 100.0);
        let traj = integrate(&p, &x0, &IntegratorConfig::days(200.0)).unwrap();
        let n0 = x0.total();
        let bound = n0.max(p.s0()) + 1e-6 * n0;
        assert!(traj.states().iter().all(|s| s.total() <= bound));
    }

    #[test]
    fn counters_are_monotone_and_states_nonnegative() {
        let p = Variant::Delta.parameters();
        let x0 = seeded_state(&p, 50.0);
        let traj = integrate(&p, &x0, &IntegratorConfig::days(365.0)).unwrap();
        let n0 = x0.total();
        for w in traj.inflows().windows(2) {
            assert!(w[1].i1 >= w[0].i1 && w[1].i2 >= w[0].i2 && w[1].a >= w[0].a);
        }
        for s in traj.states() {
            assert!(s.to_array().iter().all(|&v| v >= -1e-9 * n0));
        }
    }

    #[test]
    fn total_population_follows_balance_quadrature() {
        let p = g614();
        let x0 = seeded_state(&p, 500.0);
        let traj = integrate(&p, &x0, &IntegratorConfig::days(300.0).with_method(Method::rk4(0.01))).unwrap();
        // trapezoid quadrature of dN/dt along the stored steps
        let mut n = x0.total();
        let states = traj.states();
        let times = traj.times();
        for k in 1..states.len() {
            let b0 = population_balance(&states[k - 1], &p).unwrap();
            let b1 = population_balance(&states[k], &p).unwrap();
            n += 0.5 * (b0 + b1) * (times[k] - times[k - 1]);
        }
        let actual = traj.final_state().total();
        assert!((n - actual).abs() <= 1e-6 * actual, "quadrature {n} vs {actual}");
    }

    #[test]
    fn adaptive_agrees_with_fine_rk4() {
        let p = Variant::Alpha.parameters();
        let x0 = seeded_state(&p, 100.0);
        let a = integrate(&p, &x0, &IntegratorConfig::days(150.0)).unwrap();
        let b = integrate(&p, &x0, &IntegratorConfig::days(150.0).with_method(Method::rk4(0.01))).unwrap();
        for (u, v) in a.final_state().to_array().iter().zip(b.final_state().to_array()) {
            assert!((u - v).abs() <= 1e-6 * v.abs().max(1.0), "{u} vs {v}");
        }
    }

    #[test]
    fn without_checkpoints_the_run_takes_long_steps() {
        let p = g614();
        let rc = crate::model::control_reproduction_number(&p);
        let sub = p.with(crate::model::Param::Beta, p.beta() * 0.8 / rc).unwrap();
        let c = IntegratorConfig { day_checkpoints: false, ..IntegratorConfig::days(100_000.0) };
        let traj = integrate(&sub, &seeded_state(&sub, 1e4), &c).unwrap();
        assert!(traj.times().len() < 100_000);
        assert_eq!(traj.day_count(), 0);
        assert_eq!(*traj.times().last().unwrap(), 100_000.0);
    }
}
