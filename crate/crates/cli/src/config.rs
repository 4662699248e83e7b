//! Run configuration file (TOML).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use seiar_core::calibration::{Bounds, FitConfig, InitialSlot, ParameterSpec, Slot};
use seiar_core::model::{ModelParameters, Param, ParameterSet, StateVector, Variant, COMPARTMENTS};
use seiar_core::scenario::{DEFAULT_RHO_GRID, DEFAULT_SWEEP_HORIZON};
use seiar_core::simulation::Method;
use seiar_core::stability::AuditOptions;
use serde::Deserialize;
use toml::Value;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    parameters: BTreeMap<String, Value>,
    #[serde(default)]
    initial: BTreeMap<String, Value>,
    #[serde(default)]
    integrator: IntegratorBlock,
    #[serde(default)]
    simulate: SimulateBlock,
    #[serde(default)]
    fit: FitBlock,
    #[serde(default)]
    scenario: ScenarioBlock,
    #[serde(default)]
    forecast: ForecastBlock,
    #[serde(default)]
    stability: StabilityBlock,
    #[serde(default)]
    window: WindowBlock,
    #[serde(default)]
    paths: PathsBlock,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegratorBlock {
    method: Option<String>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateBlock {
    days: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitBlock {
    restarts: Option<usize>,
    max_evaluations: Option<usize>,
    rel_tol: Option<f64>,
    jitter: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioBlock {
    rho: Option<Vec<f64>>,
    horizon: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForecastBlock {
    horizon: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StabilityBlock {
    audit: Option<bool>,
    audit_seeds: Option<usize>,
    audit_seed: Option<u64>,
    audit_horizon: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowBlock {
    start: Option<String>,
    end: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathsBlock {
    data: Option<PathBuf>,
    out: Option<PathBuf>,
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: ParameterSpec,
    pub method: Method,
    pub simulate_days: f64,
    pub fit: FitConfig,
    pub rho_grid: Vec<f64>,
    pub sweep_horizon: usize,
    pub forecast_horizon: usize,
    pub audit: Option<AuditOptions>,
    pub window_start: Option<NaiveDate>,
    pub window_end: Option<NaiveDate>,
    pub data_path: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    /// Non-fatal problems found while reading the file.
    pub warnings: Vec<String>,
}

pub const DEFAULT_SIMULATE_DAYS: f64 = 200.0;
pub const DEFAULT_FORECAST_HORIZON: usize = 30;

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn bounds(what: &str, table: &toml::Table) -> Result<Bounds, CliError> {
    for k in table.keys() {
        if !matches!(k.as_str(), "free" | "lo" | "hi" | "guess") {
            return Err(CliError::Config(format!("{what}: unknown key `{k}` (expected free, lo, hi, guess)")));
        }
    }
    let get = |k: &str| {
        table.get(k).and_then(number).ok_or_else(|| CliError::Config(format!("{what}: `{k}` must be a number")))
    };
    Ok(Bounds::new(get("lo")?, get("hi")?, get("guess")?))
}

/// `free = false` pins a bounded entry at its guess.
fn is_free(what: &str, table: &toml::Table) -> Result<bool, CliError> {
    match table.get("free") {
        None => Ok(true),
        Some(Value::Boolean(b)) => Ok(*b),
        Some(_) => Err(CliError::Config(format!("{what}: `free` must be true or false"))),
    }
}

fn param_slot(name: &str, v: &Value) -> Result<Slot, CliError> {
    if let Some(x) = number(v) {
        return Ok(Slot::Fixed(x));
    }
    match v {
        Value::Table(t) => {
            let b = bounds(name, t)?;
            Ok(if is_free(name, t)? { Slot::Free(b) } else { Slot::Fixed(b.guess) })
        }
        _ => Err(CliError::Config(format!("parameters.{name}: expected a number or {{ lo, hi, guess }}"))),
    }
}

fn initial_slot(name: &str, v: &Value) -> Result<InitialSlot, CliError> {
    if let Some(x) = number(v) {
        return Ok(InitialSlot::Fixed(x));
    }
    match v {
        Value::Table(t) => {
            let what = format!("initial.{name}");
            let b = bounds(&what, t)?;
            Ok(if is_free(&what, t)? { InitialSlot::Free(b) } else { InitialSlot::Fixed(b.guess) })
        }
        Value::String(s) if s == "from_data" => Ok(InitialSlot::FromData),
        Value::String(s) if s == "derived" => Ok(InitialSlot::Derived),
        _ => Err(CliError::Config(format!(
            "initial.{name}: expected a number, {{ lo, hi, guess }}, \"from_data\" or \"derived\""
        ))),
    }
}

fn build_spec(raw: &RawConfig) -> Result<ParameterSpec, CliError> {
    let mut preset: Option<ParameterSet> = None;
    let mut slots: BTreeMap<Param, Slot> = BTreeMap::new();
    for (key, v) in &raw.parameters {
        if key == "variant" {
            let name = v.as_str().ok_or_else(|| CliError::Config("parameters.variant must be a string".into()))?;
            let variant: Variant = name.parse().map_err(|e| CliError::Config(format!("parameters.variant: {e}")))?;
            preset = Some(variant.parameter_set());
            continue;
        }
        let p: Param = key.parse().map_err(|_| {
            let names: Vec<_> = Param::ALL.iter().map(|p| p.name()).collect();
            CliError::Config(format!(
                "parameters: unknown key `{key}` (expected variant or one of {})",
                names.join(", ")
            ))
        })?;
        slots.insert(p, param_slot(key, v)?);
    }

    let mut set = ParameterSet::default();
    for p in Param::ALL {
        let v = match (slots.get(&p), &preset) {
            (Some(Slot::Fixed(v)), _) => *v,
            (Some(Slot::Free(b)), _) => b.guess,
            (None, Some(pre)) => pre.get(p),
            (None, None) => {
                return Err(CliError::Config(format!(
                    "parameters.{} is missing (give it or set parameters.variant)",
                    p.name()
                )))
            }
        };
        set.set(p, v);
    }
    let params = ModelParameters::new(set).map_err(|e| CliError::Config(format!("parameters: {e}")))?;

    let mut spec = ParameterSpec::fixed(&params, &StateVector::ZERO);
    for (p, slot) in &slots {
        spec.set_param(*p, *slot);
    }
    spec.set_initial(0, InitialSlot::Derived);
    for (key, v) in &raw.initial {
        let idx = COMPARTMENTS.iter().position(|c| c == key).ok_or_else(|| {
            CliError::Config(format!("initial: unknown key `{key}` (expected one of {})", COMPARTMENTS.join(", ")))
        })?;
        spec.set_initial(idx, initial_slot(key, v)?);
    }
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(spec)
}

fn build_method(b: &IntegratorBlock) -> Result<Method, CliError> {
    let method = match b.method.as_deref().unwrap_or("adaptive") {
        "adaptive" => {
            if b.step.is_some() {
                return Err(CliError::Config("integrator.step only applies to method = \"rk4\"".into()));
            }
            let Method::Adaptive { rel_tol, .. } = Method::default() else { unreachable!() };
            Method::Adaptive { rel_tol: b.rel_tol.unwrap_or(rel_tol), abs_tol: b.abs_tol }
        }
        "rk4" => {
            if b.rel_tol.is_some() || b.abs_tol.is_some() {
                return Err(CliError::Config("integrator tolerances only apply to method = \"adaptive\"".into()));
            }
            let step = b.step.ok_or_else(|| CliError::Config("integrator.step is required for rk4".into()))?;
            Method::Rk4 { step }
        }
        other => {
            return Err(CliError::Config(format!("integrator.method: unknown method `{other}` (adaptive or rk4)")))
        }
    };
    seiar_core::simulation::IntegratorConfig::days(1.0)
        .with_method(method)
        .validate()
        .map_err(|e| CliError::Config(format!("integrator: {e}")))?;
    Ok(method)
}

/// Parse `YYYY-MM-DD`. A day past the end of its month is clamped to the
/// last day, with a warning.
pub fn parse_config_date(what: &str, s: &str, warnings: &mut Vec<String>) -> Result<NaiveDate, CliError> {
    let bad = || CliError::Config(format!("{what}: `{s}` is not a YYYY-MM-DD date"));
    let mut it = s.trim().splitn(3, '-');
    let (y, m, d) = (it.next().ok_or_else(bad)?, it.next().ok_or_else(bad)?, it.next().ok_or_else(bad)?);
    let y: i32 = y.parse().map_err(|_| bad())?;
    let m: u32 = m.parse().map_err(|_| bad())?;
    let d: u32 = d.parse().map_err(|_| bad())?;
    if let Some(date) = NaiveDate::from_ymd_opt(y, m, d) {
        return Ok(date);
    }
    let first = NaiveDate::from_ymd_opt(y, m, 1).ok_or_else(bad)?;
    let last = first.checked_add_months(chrono::Months::new(1)).ok_or_else(bad)?.pred_opt().ok_or_else(bad)?;
    if d == 0 || d > 31 {
        return Err(bad());
    }
    warnings.push(format!(
        "{what}: {s} does not exist; using {last} (the last day of {}-{:02})",
        last.year(),
        last.month()
    ));
    Ok(last)
}

impl RunConfig {
    pub fn from_str(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let spec = build_spec(&raw)?;
        let method = build_method(&raw.integrator)?;
        let mut warnings = Vec::new();

        let simulate_days = raw.simulate.days.unwrap_or(DEFAULT_SIMULATE_DAYS);
        if !(simulate_days >= 1.0 && simulate_days.is_finite()) {
            return Err(CliError::Config(format!("simulate.days must be at least 1, got {simulate_days}")));
        }

        let defaults = FitConfig::default();
        let fit = FitConfig {
            restarts: raw.fit.restarts.unwrap_or(defaults.restarts),
            max_evaluations: raw.fit.max_evaluations.unwrap_or(defaults.max_evaluations),
            rel_tol: raw.fit.rel_tol.unwrap_or(defaults.rel_tol),
            jitter: raw.fit.jitter.unwrap_or(defaults.jitter),
            seed: raw.fit.seed.unwrap_or(defaults.seed),
            method,
        };
        if fit.restarts == 0 || fit.max_evaluations == 0 || !(fit.rel_tol > 0.0) || !(fit.jitter >= 0.0) {
            return Err(CliError::Config(
                "fit: restarts and max_evaluations must be >= 1, rel_tol > 0, jitter >= 0".into(),
            ));
        }

        let rho_grid = raw.scenario.rho.clone().unwrap_or_else(|| DEFAULT_RHO_GRID.to_vec());
        if rho_grid.is_empty() {
            return Err(CliError::Config("scenario.rho must not be empty".into()));
        }
        if let Some(r) = rho_grid.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(CliError::Config(format!("scenario.rho: {r} is outside [0, 1]")));
        }
        let sweep_horizon = raw.scenario.horizon.unwrap_or(DEFAULT_SWEEP_HORIZON);
        let forecast_horizon = raw.forecast.horizon.unwrap_or(DEFAULT_FORECAST_HORIZON);
        if sweep_horizon == 0 || forecast_horizon == 0 {
            return Err(CliError::Config("scenario.horizon and forecast.horizon must be at least 1".into()));
        }

        let audit = if raw.stability.audit.unwrap_or(true) {
            let d = AuditOptions::default();
            let horizon = raw.stability.audit_horizon;
            if let Some(h) = horizon {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(CliError::Config(format!("stability.audit_horizon must be positive, got {h}")));
                }
            }
            Some(AuditOptions {
                seeds: raw.stability.audit_seeds.unwrap_or(d.seeds),
                seed: raw.stability.audit_seed.unwrap_or(d.seed),
                horizon,
            })
        } else {
            None
        };

        let window_start =
            raw.window.start.as_deref().map(|s| parse_config_date("window.start", s, &mut warnings)).transpose()?;
        let window_end =
            raw.window.end.as_deref().map(|s| parse_config_date("window.end", s, &mut warnings)).transpose()?;
        if let (Some(a), Some(b)) = (window_start, window_end) {
            if b < a {
                return Err(CliError::Config(format!("window: end {b} is before start {a}")));
            }
        }

        let resolve =
            |p: &Option<PathBuf>| p.as_ref().map(|p| if p.is_absolute() { p.clone() } else { base_dir.join(p) });
        Ok(RunConfig {
            spec,
            method,
            simulate_days,
            fit,
            rho_grid,
            sweep_horizon,
            forecast_horizon,
            audit,
            window_start,
            window_end,
            data_path: resolve(&raw.paths.data),
            out_dir: resolve(&raw.paths.out),
            warnings,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::from_str(&text, dir)
    }
}
