//! Least-squares fitting of the model to daily counts of newly detected
//! cases.

mod nelder_mead;
mod spec;
mod synthetic;

pub use nelder_mead::{minimize, SimplexOptions, SimplexOutcome};
pub use spec::{Bounds, InitialSlot, ParameterSpec, Slot, DEFAULT_FREE, DEFAULT_INITIAL_MAX};
pub use synthetic::{synthesize_data, NoiseModel};

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{control_reproduction_number, ModelError, ModelParameters, StateVector};
use crate::simulation::{daily_incidence, integrate, IntegratorConfig, Method, SimulationError};

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("invalid parameter spec: {0}")]
    InvalidSpec(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("expected {expected} free values, got {got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("every start failed to integrate")]
    AllStartsFailed,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
}

/// Daily counts of new detected cases; `counts[0]` is day 0 of the model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservedSeries {
    pub start: Option<NaiveDate>,
    pub counts: Vec<f64>,
}

impl ObservedSeries {
    pub fn new(start: Option<NaiveDate>, counts: Vec<f64>) -> Result<Self, CalibrationError> {
        if counts.is_empty() {
            return Err(CalibrationError::InvalidData("series is empty".into()));
        }
        if let Some(d) = counts.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(CalibrationError::InvalidData(format!(
                "day {d}: count {} is not a nonnegative number",
                counts[d]
            )));
        }
        Ok(ObservedSeries { start, counts })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Objective value returned when a candidate cannot be evaluated (invalid
/// parameters, negative derived S, integration failure). Finite, and far
/// above any realistic sum of squares, so the search backs away.
pub const FAILED_EVALUATION_PENALTY: f64 = 1e30;

/// Model incidence over the data window for a complete parameter set.
pub fn modeled_incidence(
    params: &ModelParameters,
    initial: &StateVector,
    days: usize,
    method: &Method,
) -> Result<Vec<f64>, CalibrationError> {
    let config = IntegratorConfig::days(days as f64).with_method(*method);
    let traj = integrate(params, initial, &config)?;
    Ok(daily_incidence(&traj)?.values)
}

fn sse(modeled: &[f64], observed: &[f64]) -> f64 {
    modeled.iter().zip(observed).map(|(m, o)| (m - o).powi(2)).sum()
}

/// Sum over days of `(model - observed)^2`, or
/// [`FAILED_EVALUATION_PENALTY`] when the candidate cannot be evaluated.
pub fn sse_objective(free: &[f64], spec: &ParameterSpec, data: &ObservedSeries, method: &Method) -> f64 {
    let eval = || -> Result<f64, CalibrationError> {
        let (p, x0) = spec.assemble(free, data)?;
        Ok(sse(&modeled_incidence(&p, &x0, data.len(), method)?, &data.counts))
    };
    match eval() {
        Ok(v) if v.is_finite() => v,
        _ => FAILED_EVALUATION_PENALTY,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Independent starts: the first from the guess, the rest jittered.
    pub restarts: usize,
    /// Evaluation budget per start.
    pub max_evaluations: usize,
    /// Simplex diameter tolerance, relative, in search coordinates.
    pub rel_tol: f64,
    /// Standard deviation of the jitter in search coordinates.
    pub jitter: f64,
    pub seed: u64,
    pub method: Method,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { restarts: 5, max_evaluations: 2000, rel_tol: 1e-8, jitter: 0.5, seed: 0, method: Method::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub day: usize,
    pub observed: f64,
    pub modeled: f64,
    /// `observed - modeled`
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub spec: ParameterSpec,
    pub params: ModelParameters,
    pub initial: StateVector,
    pub free_names: Vec<String>,
    pub free_values: Vec<f64>,
    pub objective: f64,
    pub objective_at_guess: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Index of the winning start.
    pub start_index: usize,
    /// Best objective after each iteration of the winning start.
    pub history: Vec<f64>,
    pub residuals: Vec<Residual>,
    pub r_c: f64,
    /// Length of the data window in days.
    pub days: usize,
    pub method: Method,
}

/// Smooth bijection between the real line and `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
struct BoxMap {
    lo: f64,
    hi: f64,
}

/// Guesses are kept this far inside the box so the search starts where the
/// map is not flat.
const EDGE: f64 = 1e-4;

impl BoxMap {
    fn decode(&self, z: f64) -> f64 {
        let u = 1.0 / (1.0 + (-z).exp());
        (self.lo + (self.hi - self.lo) * u).clamp(self.lo, self.hi)
    }

    fn encode(&self, x: f64) -> f64 {
        if self.hi <= self.lo {
            return 0.0;
        }
        let u = ((x - self.lo) / (self.hi - self.lo)).clamp(EDGE, 1.0 - EDGE);
        (u / (1.0 - u)).ln()
    }
}

struct StartOutcome {
    z: Vec<f64>,
    fx: f64,
    iterations: usize,
    evaluations: usize,
    converged: bool,
    history: Vec<f64>,
}

/// Simplex search from `z0`, restarted from its own best point while budget
/// remains and the restart still improves.
fn run_start<F: Fn(&[f64]) -> f64>(objective: &F, z0: Vec<f64>, config: &FitConfig) -> StartOutcome {
    let mut out =
        StartOutcome { z: z0, fx: f64::INFINITY, iterations: 0, evaluations: 0, converged: false, history: Vec::new() };
    while out.evaluations < config.max_evaluations {
        let opts = SimplexOptions {
            max_evaluations: config.max_evaluations - out.evaluations,
            rel_tol: config.rel_tol,
            initial_step: 0.5,
        };
        let r = minimize(objective, &out.z, &opts);
        let improved = r.fx < out.fx;
        let first = out.history.is_empty();
        out.evaluations += r.evaluations;
        out.iterations += r.iterations;
        out.history.extend(if first { &r.history[..] } else { &r.history[1..] });
        out.converged = r.converged;
        if !first && !improved {
            break;
        }
        out.z = r.x;
        out.fx = r.fx;
        if !r.converged {
            break;
        }
    }
    out
}

/// Bounded simplex search for the free values minimizing [`sse_objective`].
/// Deterministic for a given spec, data and config.
pub fn fit(spec: &ParameterSpec, data: &ObservedSeries, config: &FitConfig) -> Result<FitResult, CalibrationError> {
    spec.validate()?;
    if data.is_empty() {
        return Err(CalibrationError::InvalidData("series is empty".into()));
    }
    let maps: Vec<BoxMap> = spec.bounds().into_iter().map(|(lo, hi)| BoxMap { lo, hi }).collect();
    let to_box = |z: &[f64]| -> Vec<f64> { z.iter().zip(&maps).map(|(z, m)| m.decode(*z)).collect() };
    let objective = |z: &[f64]| sse_objective(&to_box(z), spec, data, &config.method);

    let guess = spec.guess();
    let objective_at_guess = sse_objective(&guess, spec, data, &config.method);

    let starts: Vec<StartOutcome> = if maps.is_empty() {
        vec![StartOutcome {
            z: Vec::new(),
            fx: objective_at_guess,
            iterations: 0,
            evaluations: 1,
            converged: true,
            history: vec![objective_at_guess],
        }]
    } else {
        let z0: Vec<f64> = guess.iter().zip(&maps).map(|(g, m)| m.encode(*g)).collect();
        (0..config.restarts.max(1))
            .into_par_iter()
            .map(|r| {
                let mut z = z0.clone();
                if r > 0 {
                    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                    rng.set_stream(r as u64);
                    for v in z.iter_mut() {
                        let n: f64 = StandardNormal.sample(&mut rng);
                        *v += config.jitter * n;
                    }
                }
                run_start(&objective, z, config)
            })
            .collect()
    };

    // lowest index wins ties
    let mut best = 0;
    for (i, s) in starts.iter().enumerate() {
        if s.fx < starts[best].fx {
            best = i;
        }
    }
    let mut winner = starts.into_iter().nth(best).expect("at least one start");
    if winner.fx >= FAILED_EVALUATION_PENALTY {
        return Err(CalibrationError::AllStartsFailed);
    }
    let mut free_values = to_box(&winner.z);
    let mut objective = winner.fx;
    // the search never accepts a worse point, but the guess itself may sit
    // on a bound the transform cannot reach exactly
    if objective_at_guess <= objective {
        free_values = guess;
        objective = objective_at_guess;
        winner.history.push(objective);
    }

    let (params, initial) = spec.assemble(&free_values, data)?;
    let modeled = modeled_incidence(&params, &initial, data.len(), &config.method)?;
    let residuals = modeled
        .iter()
        .zip(&data.counts)
        .enumerate()
        .map(|(day, (&m, &o))| Residual { day, observed: o, modeled: m, residual: o - m })
        .collect();

    Ok(FitResult {
        spec: spec.clone(),
        r_c: control_reproduction_number(&params),
        params,
        initial,
        free_names: spec.free_names(),
        free_values,
        objective,
        objective_at_guess,
        iterations: winner.iterations,
        evaluations: winner.evaluations,
        converged: winner.converged,
        start_index: best,
        history: winner.history,
        residuals,
        days: data.len(),
        method: config.method,
    })
}
