use seiar_core::calibration::{fit, FitResult, InitialSlot, ObservedSeries, ParameterSpec, Slot};
use seiar_core::model::{ModelParameters, Param, StateVector, COMPARTMENTS};
use seiar_core::scenario::{decline_percentages, forecast, rho_sweep};
use seiar_core::simulation::{daily_incidence, integrate, peak, IntegratorConfig};
use seiar_core::stability::{analyze, StabilityReport};

use crate::config::RunConfig;
use crate::data::CaseSeries;
use crate::error::CliError;
use crate::output::{csv_file, fmt, OutputFile};

/// Parameters and initial state with free entries at their guesses.
fn fixed_point(spec: &ParameterSpec) -> Result<(ModelParameters, StateVector), CliError> {
    if (0..COMPARTMENTS.len()).any(|i| spec.initial(i) == InitialSlot::FromData) {
        return Err(CliError::Config("initial.I1 = \"from_data\" needs a data file; use a number here".into()));
    }
    // no entry reads the data when nothing comes from it
    let placeholder = ObservedSeries::new(None, vec![0.0]).expect("valid");
    Ok(spec.assemble(&spec.guess(), &placeholder)?)
}

pub fn simulate(cfg: &RunConfig) -> Result<Vec<OutputFile>, CliError> {
    let (params, x0) = fixed_point(&cfg.spec)?;
    let traj = integrate(&params, &x0, &IntegratorConfig::days(cfg.simulate_days).with_method(cfg.method))?;
    let rows = traj.times().iter().zip(traj.states()).zip(traj.inflows()).map(|((t, x), c)| {
        let mut r = vec![fmt(*t)];
        r.extend(x.to_array().iter().map(|v| fmt(*v)));
        r.extend([fmt(c.i1), fmt(c.i2), fmt(c.a)]);
        r
    });
    let trajectory =
        csv_file("trajectory.csv", &["t", "S", "E1", "E2", "I1", "I2", "A", "R", "cum_I1", "cum_I2", "cum_A"], rows);
    let inc = daily_incidence(&traj)?;
    let incidence = csv_file(
        "incidence.csv",
        &["day", "new_confirmed"],
        inc.values.iter().enumerate().map(|(d, v)| vec![d.to_string(), fmt(*v)]),
    );
    let pk = peak(&inc)?;
    eprintln!("peak: day {} with {} new detected cases", pk.day, pk.value);
    Ok(vec![trajectory, incidence])
}

fn push_report(rows: &mut Vec<Vec<String>>, section: &str, r: &StabilityReport) {
    let mut add = |k: String, v: String| rows.push(vec![section.to_string(), k, v]);
    for (name, v) in COMPARTMENTS.iter().zip(r.equilibrium.state.to_array()) {
        add(name.to_string(), fmt(v));
    }
    add("verdict".into(), r.verdict.label().into());
    add("max_real_part".into(), fmt(r.max_real_part));
    add("margin".into(), fmt(r.margin));
    for (k, (re, im)) in r.eigenvalues.iter().enumerate() {
        add(format!("eigenvalue_{k}_re"), fmt(*re));
        add(format!("eigenvalue_{k}_im"), fmt(*im));
    }
}

pub fn stability(cfg: &RunConfig) -> Result<Vec<OutputFile>, CliError> {
    let (params, _) = fixed_point(&cfg.spec)?;
    let a = analyze(&params, cfg.audit.as_ref())?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut add = |s: &str, k: &str, v: String| rows.push(vec![s.into(), k.into(), v]);
    add("summary", "R_c", fmt(a.r_c));
    add("summary", "S0", fmt(params.s0()));
    for p in Param::ALL {
        add("parameters", p.name(), fmt(params.get(p)));
    }
    let q = &a.quartic;
    for (k, v) in [
        ("a1", q.a1),
        ("a2", q.a2),
        ("a3", q.a3),
        ("a4", q.a4),
        ("a4_expanded", q.a4_expanded()),
        ("B1", q.b1),
        ("B2", q.b2),
        ("B3", q.b3),
        ("C1", q.c1),
        ("C2", q.c2),
        ("C3", q.c3),
        ("C4", q.c4),
        ("D", q.d),
    ] {
        add("quartic", k, fmt(v));
    }
    add("quartic", "positive_root_certificate", a.positive_root.is_some().to_string());
    if let Some(root) = a.positive_root {
        add("quartic", "positive_root", fmt(root));
    }
    push_report(&mut rows, "disease_free", &a.disease_free);
    rows.push(vec!["endemic".into(), "present".into(), a.endemic.is_some().to_string()]);
    if let Some(e) = &a.endemic {
        push_report(&mut rows, "endemic", e);
    }
    match (&a.lyapunov, cfg.audit.is_some()) {
        (Some(s), _) => {
            let mut add = |k: &str, v: String| rows.push(vec!["lyapunov".into(), k.into(), v]);
            add("performed", "true".into());
            add("verdict", if s.all_passed() { "pass" } else { "fail" }.into());
            add("runs", s.runs.to_string());
            add("passed", s.passed.to_string());
            add("worst_relative_increase", fmt(s.worst_relative_increase));
            add("worst_final_distance", fmt(s.worst_final_distance));
        }
        (None, true) => rows.push(vec!["lyapunov".into(), "performed".into(), "false (R_c >= 1)".into()]),
        (None, false) => rows.push(vec!["lyapunov".into(), "performed".into(), "false (disabled)".into()]),
    }
    Ok(vec![csv_file("stability.csv", &["section", "key", "value"], rows)])
}

fn load_window(cfg: &RunConfig, data: &CaseSeries) -> Result<(CaseSeries, ObservedSeries), CliError> {
    let window = data.window(cfg.window_start, cfg.window_end)?;
    let observed = window.observed()?;
    Ok((window, observed))
}

fn run_fit(cfg: &RunConfig, data: &CaseSeries) -> Result<FitResult, CliError> {
    let (_, observed) = load_window(cfg, data)?;
    let r = fit(&cfg.spec, &observed, &cfg.fit)?;
    eprintln!(
        "fit: objective {} (guess {}), R_c {}, {} evaluations, converged {}",
        r.objective, r.objective_at_guess, r.r_c, r.evaluations, r.converged
    );
    Ok(r)
}

pub fn fit_cmd(cfg: &RunConfig, data: &CaseSeries) -> Result<Vec<OutputFile>, CliError> {
    let r = run_fit(cfg, data)?;
    let (window, _) = load_window(cfg, data)?;

    let mut rows = Vec::new();
    for p in Param::ALL {
        rows.push(vec![p.name().to_string(), r.spec.param(p).status().into(), fmt(r.params.get(p))]);
    }
    for (i, (name, v)) in COMPARTMENTS.iter().zip(r.initial.to_array()).enumerate() {
        rows.push(vec![format!("{name}(0)"), r.spec.initial(i).status().into(), fmt(v)]);
    }
    let fit_csv = csv_file("fit.csv", &["parameter", "status", "value"], rows);
    let residuals = csv_file(
        "residuals.csv",
        &["day", "observed", "modeled", "residual"],
        r.residuals.iter().map(|x| vec![x.day.to_string(), fmt(x.observed), fmt(x.modeled), fmt(x.residual)]),
    );
    let free: serde_json::Map<String, serde_json::Value> =
        r.free_names.iter().zip(&r.free_values).map(|(n, v)| (n.clone(), (*v).into())).collect();
    let summary = serde_json::json!({
        "objective": r.objective,
        "objective_at_guess": r.objective_at_guess,
        "r_c": r.r_c,
        "converged": r.converged,
        "iterations": r.iterations,
        "evaluations": r.evaluations,
        "start_index": r.start_index,
        "days": r.days,
        "start_date": window.dates.as_ref().map(|d| d[0].to_string()),
        "free": free,
    });
    let mut json = serde_json::to_vec_pretty(&summary).expect("serializable");
    json.push(b'\n');
    let free_count = r.spec.free_names().len();
    let fixed_count = Param::ALL.iter().filter(|p| matches!(r.spec.param(**p), Slot::Fixed(_))).count();
    eprintln!("fit: {free_count} free, {fixed_count} fixed parameters");
    Ok(vec![fit_csv, residuals, OutputFile { name: "fit_summary.json", bytes: json }])
}

pub fn sweep(cfg: &RunConfig) -> Result<Vec<OutputFile>, CliError> {
    let (params, x0) = fixed_point(&cfg.spec)?;
    let s = rho_sweep(&params, &x0, &cfg.rho_grid, cfg.sweep_horizon, &cfg.method)?;
    let mut rows = s.rows.clone();
    rows.sort_by(|a, b| a.rho.total_cmp(&b.rho));
    let opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), fmt);
    let sweep_csv = csv_file(
        "sweep.csv",
        &[
            "rho",
            "cum_total",
            "cum_I1",
            "cum_I2",
            "cum_A",
            "prop_A_cumulative",
            "prop_A_prevalence",
            "r_c",
            "final_day_new_confirmed",
        ],
        rows.iter().map(|r| {
            vec![
                fmt(r.rho),
                fmt(r.cum_total),
                fmt(r.cum_i1),
                fmt(r.cum_i2),
                fmt(r.cum_a),
                opt(r.prop_a_cumulative),
                opt(r.prop_a_prevalence),
                fmt(r.r_c),
                fmt(r.final_day_incidence),
            ]
        }),
    );
    let mut files = vec![sweep_csv];
    if s.rows.len() >= 2 {
        let d = decline_percentages(&s)?;
        files.push(csv_file(
            "decline.csv",
            &["metric", "rho_from", "rho_to", "decline_pct"],
            [
                ("total", d.total),
                ("asymptomatic_count", d.asymptomatic_count),
                ("asymptomatic_share", d.asymptomatic_share),
            ]
            .into_iter()
            .map(|(m, v)| vec![m.to_string(), fmt(d.rho_min), fmt(d.rho_max), opt(v)]),
        ));
    } else {
        eprintln!("note: decline.csv needs at least two rho values; skipped");
    }
    Ok(files)
}

pub fn predict(cfg: &RunConfig, data: &CaseSeries) -> Result<Vec<OutputFile>, CliError> {
    let r = run_fit(cfg, data)?;
    let f = forecast(&r, cfg.forecast_horizon)?;
    let series = csv_file(
        "forecast.csv",
        &["day", "predicted_new_confirmed"],
        f.series.values.iter().enumerate().map(|(k, v)| vec![(f.start_day + k).to_string(), fmt(*v)]),
    );
    let peak =
        csv_file("peak.csv", &["day", "predicted_new_confirmed"], [vec![f.peak.day.to_string(), fmt(f.peak.value)]]);
    eprintln!("forecast peak: day {} with {} new detected cases", f.peak.day, f.peak.value);
    Ok(vec![series, peak])
}
