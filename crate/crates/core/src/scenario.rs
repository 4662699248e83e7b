//! Detection-ratio sweeps and forecasts from a fitted baseline.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::calibration::FitResult;
use crate::model::{control_reproduction_number, ModelError, ModelParameters, Param, StateVector};
use crate::simulation::{
    cumulative_by_class, daily_incidence, integrate, peak, IncidenceSeries, IntegratorConfig, Method, Peak,
    SimulationError,
};

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("rho grid is empty")]
    EmptyGrid,
    #[error("rho = {0} is outside [0, 1]")]
    InvalidRho(f64),
    #[error("need at least two rho values, got {0}")]
    TooFewValues(usize),
    #[error("horizon must be at least one day")]
    InvalidHorizon,
    #[error("simulation failed at rho = {rho}: {source}")]
    Simulation { rho: f64, source: SimulationError },
    #[error(transparent)]
    Forecast(#[from] SimulationError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub const DEFAULT_RHO_GRID: [f64; 4] = [0.2, 0.4, 0.6, 0.8];
pub const DEFAULT_SWEEP_HORIZON: usize = 365;

/// Metrics of one run of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub rho: f64,
    pub r_c: f64,
    /// Cumulative inflow into I1 + I2 + A over the horizon.
    pub cum_total: f64,
    pub cum_i1: f64,
    pub cum_i2: f64,
    pub cum_a: f64,
    /// `cum_a / cum_total`; `None` when nobody was infected.
    pub prop_a_cumulative: Option<f64>,
    /// `A / (I1 + I2 + A)` at the horizon.
    pub prop_a_prevalence: Option<f64>,
    pub final_day_incidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub horizon: usize,
    /// One row per requested rho, in request order.
    pub rows: Vec<SweepRow>,
}

fn sweep_row(
    params: &ModelParameters,
    initial: &StateVector,
    rho: f64,
    horizon: usize,
    method: &Method,
) -> Result<SweepRow, ScenarioError> {
    let p = params.with(Param::Rho, rho)?;
    let wrap = |source| ScenarioError::Simulation { rho, source };
    let traj = integrate(&p, initial, &IntegratorConfig::days(horizon as f64).with_method(*method)).map_err(wrap)?;
    let totals = cumulative_by_class(&traj);
    let incidence = daily_incidence(&traj).map_err(wrap)?;
    Ok(SweepRow {
        rho,
        r_c: control_reproduction_number(&p),
        cum_total: totals.cum_total(),
        cum_i1: totals.cum_i1,
        cum_i2: totals.cum_i2,
        cum_a: totals.cum_a,
        prop_a_cumulative: totals.cumulative_shares.map(|s| s.a),
        prop_a_prevalence: totals.prevalence_shares.map(|s| s.a),
        final_day_incidence: *incidence.values.last().expect("horizon >= 1"),
    })
}

/// One simulation per rho with every other parameter held at `params`.
pub fn rho_sweep(
    params: &ModelParameters,
    initial: &StateVector,
    rhos: &[f64],
    horizon: usize,
    method: &Method,
) -> Result<SweepResult, ScenarioError> {
    if rhos.is_empty() {
        return Err(ScenarioError::EmptyGrid);
    }
    if let Some(&bad) = rhos.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(ScenarioError::InvalidRho(bad));
    }
    if horizon == 0 {
        return Err(ScenarioError::InvalidHorizon);
    }
    // collect every outcome first so the reported failure is the first in
    // grid order, whatever the scheduling
    let rows = rhos
        .par_iter()
        .map(|&rho| sweep_row(params, initial, rho, horizon, method))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepResult { horizon, rows })
}

/// Sweep around a fitted baseline, starting from its fitted initial state.
pub fn rho_sweep_from_fit(fit: &FitResult, rhos: &[f64], horizon: usize) -> Result<SweepResult, ScenarioError> {
    rho_sweep(&fit.params, &fit.initial, rhos, horizon, &fit.method)
}

/// Percentage drop of each metric from the smallest to the largest rho:
/// `100 (m(rho_min) - m(rho_max)) / m(rho_min)`, `None` when
/// `m(rho_min) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeclinePercentages {
    pub rho_min: f64,
    pub rho_max: f64,
    /// Cumulative I1 + I2 + A inflow.
    pub total: Option<f64>,
    /// Cumulative A inflow.
    pub asymptomatic_count: Option<f64>,
    /// Share of A in the cumulative inflow.
    pub asymptomatic_share: Option<f64>,
}

fn decline(from: f64, to: f64) -> Option<f64> {
    (from != 0.0).then(|| 100.0 * (from - to) / from)
}

pub fn decline_percentages(sweep: &SweepResult) -> Result<DeclinePercentages, ScenarioError> {
    if sweep.rows.len() < 2 {
        return Err(ScenarioError::TooFewValues(sweep.rows.len()));
    }
    // first occurrence wins among equal rho values
    let mut lo = &sweep.rows[0];
    let mut hi = &sweep.rows[0];
    for r in &sweep.rows[1..] {
        if r.rho < lo.rho {
            lo = r;
        }
        if r.rho > hi.rho {
            hi = r;
        }
    }
    Ok(DeclinePercentages {
        rho_min: lo.rho,
        rho_max: hi.rho,
        total: decline(lo.cum_total, hi.cum_total),
        asymptomatic_count: decline(lo.cum_a, hi.cum_a),
        asymptomatic_share: decline(lo.prop_a_cumulative.unwrap_or(0.0), hi.prop_a_cumulative.unwrap_or(0.0)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Forecast {
    /// Length of the fitted window; the forecast starts on this day.
    pub start_day: usize,
    pub horizon: usize,
    /// Predicted daily new detected cases for days `start_day..start_day + horizon`.
    pub series: IncidenceSeries,
    pub peak: Peak,
}

/// Continue a run from `initial` past the first `data_days` days.
pub fn forecast_from(
    params: &ModelParameters,
    initial: &StateVector,
    data_days: usize,
    horizon: usize,
    method: &Method,
) -> Result<Forecast, ScenarioError> {
    if horizon == 0 {
        return Err(ScenarioError::InvalidHorizon);
    }
    let end = data_days + horizon;
    let traj = integrate(params, initial, &IntegratorConfig::days(end as f64).with_method(*method))?;
    let series = daily_incidence(&traj)?.window(data_days, end);
    let peak = peak(&series)?;
    Ok(Forecast { start_day: data_days, horizon, series, peak })
}

/// Extend a fit past its data window by `horizon` days.
pub fn forecast(fit: &FitResult, horizon: usize) -> Result<Forecast, ScenarioError> {
    forecast_from(&fit.params, &fit.initial, fit.days, horizon, &fit.method)
}
