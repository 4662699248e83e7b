//! Acceptance checks. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits nonzero if any criterion fails.

mod common;

use std::fs;
use std::panic;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seiar_core::calibration::{fit, synthesize_data, Bounds, FitConfig, NoiseModel, ParameterSpec, Slot};
use seiar_core::model::{
    control_reproduction_number, disease_free_equilibrium, endemic_equilibrium, next_generation_matrices,
    ngm_spectral_radius, ngm_spectral_radius_dense, population_balance, rhs, ModelParameters, Param, StateVector,
    Variant,
};
use seiar_core::scenario::{decline_percentages, rho_sweep, DEFAULT_RHO_GRID, DEFAULT_SWEEP_HORIZON};
use seiar_core::simulation::{integrate, seeded_state, IntegratorConfig, Method, Trajectory};
use seiar_core::stability::{
    analyze, audit_initial_conditions, default_audit_horizon, lyapunov_audit_all, quartic_coefficients, AuditSummary,
    Verdict, AUDIT_ABS_TOL, CONVERGENCE_TOLERANCE, MONOTONICITY_SLACK,
};

use common::{column, json, rel, run_in, write};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// A reference variant with every rate scaled by a log-uniform factor in
/// `[0.5, 2]` and `rho`, `omega` drawn from `[0, 1]`.
fn random_parameters(rng: &mut ChaCha8Rng) -> ModelParameters {
    let base = Variant::ALL[rng.random_range(0..Variant::ALL.len())].parameter_set();
    let mut set = base;
    for p in Param::ALL {
        let v = if p.is_fraction() {
            rng.random_range(0.0..=1.0)
        } else {
            base.get(p) * 2f64.powf(rng.random_range(-1.0..=1.0))
        };
        set.set(p, v);
    }
    ModelParameters::new(set).unwrap()
}

/// Random draw with beta rescaled so that R_c is log-uniform in `[1/4, 4]`.
fn random_with_spread_rc(rng: &mut ChaCha8Rng) -> ModelParameters {
    let p = random_parameters(rng);
    let target = 4f64.powf(rng.random_range(-1.0..=1.0));
    let beta = p.beta() * target / control_reproduction_number(&p);
    p.with(Param::Beta, beta).unwrap()
}

/// Smallest compartment relative to N(0), and the mismatch between N(t_end)
/// and trapezoid quadrature of `dN/dt` along the stored steps, relative to N.
#[derive(Default)]
struct RunHealth {
    runs: usize,
    worst_negative: f64,
    worst_balance: f64,
}

impl RunHealth {
    fn record(&mut self, p: &ModelParameters, traj: &Trajectory) {
        let n0 = traj.states()[0].total();
        let min = traj.states().iter().flat_map(|s| s.to_array()).fold(f64::INFINITY, f64::min);
        self.worst_negative = self.worst_negative.min(min / n0);
        let mut n = n0;
        for k in 1..traj.len() {
            let b0 = population_balance(&traj.states()[k - 1], p).unwrap();
            let b1 = population_balance(&traj.states()[k], p).unwrap();
            n += 0.5 * (b0 + b1) * (traj.times()[k] - traj.times()[k - 1]);
        }
        let actual = traj.final_state().total();
        self.worst_balance = self.worst_balance.max((n - actual).abs() / actual);
        self.runs += 1;
    }

    fn check(&self) -> Result<String, String> {
        let msg = format!(
            "{} runs: min state {:.1e} N(0), balance error {:.1e}",
            self.runs, self.worst_negative, self.worst_balance
        );
        ensure(self.worst_negative >= -1e-6 && self.worst_balance <= 1e-6, || msg.clone())?;
        Ok(msg)
    }
}

const ORACLE_RC: [(Variant, f64); 4] = [
    (Variant::G614, 1.663358707109074859),
    (Variant::Alpha, 2.1777967468554424162),
    (Variant::Delta, 2.3260108965810045575),
    (Variant::Omicron, 1.0810060919697604354),
];

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sets: Vec<ModelParameters> =
        Variant::ALL.iter().map(|v| v.parameters()).chain((0..1000).map(|_| random_parameters(&mut rng))).collect();
    let mut worst: f64 = 0.0;
    for p in &sets {
        let closed = control_reproduction_number(p);
        let (f, v) = next_generation_matrices(p);
        for radius in [ngm_spectral_radius(&f, &v).unwrap(), ngm_spectral_radius_dense(&f, &v).unwrap()] {
            worst = worst.max(rel(radius, closed));
        }
    }
    ensure(worst <= 1e-10, || format!("worst relative gap {worst:.2e}"))?;
    Ok(format!("{} parameter sets, rank-one and dense eigen routes, worst relative gap {worst:.2e}", sets.len()))
}

fn criterion_2() -> Check {
    let mut parts = Vec::new();
    for (v, oracle) in ORACLE_RC {
        let rc = control_reproduction_number(&v.parameters());
        let e = rel(rc, oracle);
        ensure(e <= 1e-6, || format!("{v}: R_c {rc} vs oracle {oracle}"))?;
        parts.push(format!("{v} {rc:.6}"));
    }
    Ok(parts.join(", "))
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sets: Vec<ModelParameters> =
        Variant::ALL.iter().map(|v| v.parameters()).chain((0..1000).map(|_| random_with_spread_rc(&mut rng))).collect();
    let (mut endemic, mut worst_res, mut worst_id): (usize, f64, f64) = (0, 0.0, 0.0);
    for p in &sets {
        let dfe = disease_free_equilibrium(p);
        let r0 = rhs(&dfe.state, p).unwrap().max_abs();
        ensure(r0 == 0.0, || format!("rhs(P0) = {r0:e}"))?;
        let rc = control_reproduction_number(p);
        match endemic_equilibrium(p) {
            Some(eq) => {
                ensure(rc > 1.0, || format!("endemic state returned at R_c = {rc}"))?;
                endemic += 1;
                let r = rhs(&eq.state, p).unwrap().max_abs() / p.lambda();
                worst_res = worst_res.max(r);
                worst_id = worst_id.max(rel(p.s0() / eq.state.s, rc));
            }
            None => ensure(rc <= 1.0, || format!("no endemic state at R_c = {rc}"))?,
        }
    }
    ensure(worst_res <= 1e-8, || format!("||rhs(P*)|| = {worst_res:.2e} Lambda"))?;
    ensure(worst_id <= 1e-10, || format!("S0/S* vs R_c gap {worst_id:.2e}"))?;
    Ok(format!(
        "{} sets, rhs(P0) = 0 exactly; {endemic} endemic: ||rhs(P*)|| <= {worst_res:.1e} Lambda, S0/S* gap {worst_id:.1e}",
        sets.len()
    ))
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut draws, mut below) = (0, 0);
    let mut worst_a4: f64 = 0.0;
    while draws < 200 {
        let p = random_with_spread_rc(&mut rng);
        let rc = control_reproduction_number(&p);
        if (rc - 1.0).abs() <= 0.02 {
            continue;
        }
        draws += 1;
        let a = analyze(&p, None).map_err(|e| e.to_string())?;
        let expected = if rc < 1.0 { Verdict::Stable } else { Verdict::Unstable };
        ensure(a.disease_free.verdict == expected, || format!("R_c = {rc}: DFE verdict {:?}", a.disease_free.verdict))?;
        let q = quartic_coefficients(&p);
        let scale = q.b1 * q.b2 * q.b3 * q.c1;
        let independent = scale * (1.0 - rc);
        worst_a4 = worst_a4.max((q.a4 - independent).abs() / scale).max((q.a4_expanded() - independent).abs() / scale);
        ensure(q.a4.signum() == (1.0 - rc).signum(), || format!("R_c = {rc}: a4 = {}", q.a4))?;
        below += usize::from(rc < 1.0);
    }
    ensure(worst_a4 <= 1e-10, || format!("a4 vs B1B2B3C1(1 - R_c): {worst_a4:.2e}"))?;
    let mut endemic = Vec::new();
    for v in Variant::ALL {
        let a = analyze(&v.parameters(), None).map_err(|e| e.to_string())?;
        let e = a.endemic.ok_or_else(|| format!("{v}: no endemic state"))?;
        ensure(e.max_real_part < 0.0 && e.verdict == Verdict::Stable, || {
            format!("{v}: endemic max Re = {:e}", e.max_real_part)
        })?;
        endemic.push(format!("{v} {:.2e}", e.max_real_part));
    }
    Ok(format!(
        "{draws} draws ({below} with R_c < 1): DFE verdicts and sign(a4) match, a4 gap {worst_a4:.1e}; endemic max Re: {}",
        endemic.join(", ")
    ))
}

fn criterion_5(health: &mut RunHealth) -> Check {
    let g = Variant::G614.parameters();
    let p = g.with(Param::Beta, g.beta() * 0.8 / control_reproduction_number(&g)).unwrap();
    let rc = control_reproduction_number(&p);
    ensure(rel(rc, 0.8) < 1e-12, || format!("R_c = {rc}"))?;
    let initials = audit_initial_conditions(&p, 20, 0x5eed);
    let horizon = default_audit_horizon(&p);
    let audits = lyapunov_audit_all(&p, &initials, horizon).map_err(|e| e.to_string())?;
    let s = AuditSummary::from_audits(&audits);
    for x in &initials {
        let config = IntegratorConfig {
            method: Method::Adaptive { rel_tol: 1e-10, abs_tol: Some(AUDIT_ABS_TOL * x.total()) },
            t0: 0.0,
            t_end: horizon,
            day_checkpoints: false,
        };
        health.record(&p, &integrate(&p, x, &config).map_err(|e| e.to_string())?);
    }
    let msg = format!(
        "{}/{} runs over {horizon:.0} days: worst V increase {:.1e} (slack {MONOTONICITY_SLACK:e}), worst distance to P0 {:.1e} N(0) (limit {CONVERGENCE_TOLERANCE:e})",
        s.passed, s.runs, s.worst_relative_increase, s.worst_final_distance
    );
    ensure(s.runs == 20 && s.all_passed(), || msg.clone())?;
    Ok(msg)
}

fn criterion_6(health: &mut RunHealth) -> Check {
    let p = Variant::G614.parameters();
    let x0 = seeded_state(&p, 1000.0);
    let days = 120.0;
    let run = |h: f64| integrate(&p, &x0, &IntegratorConfig::days(days).with_method(Method::rk4(h)));
    let reference = run(1.0 / 128.0).map_err(|e| e.to_string())?;
    let coarse = run(0.5).map_err(|e| e.to_string())?;
    let fine = run(0.25).map_err(|e| e.to_string())?;
    let err = |t: &Trajectory| t.final_state().sub(reference.final_state()).max_abs();
    let (e1, e2) = (err(&coarse), err(&fine));
    let ratio = e1 / e2;
    for t in [&reference, &coarse, &fine] {
        health.record(&p, t);
    }
    let adaptive = integrate(&p, &x0, &IntegratorConfig::days(365.0)).map_err(|e| e.to_string())?;
    health.record(&p, &adaptive);
    let h = health.check()?;
    let msg = format!(
        "endpoint error {e1:.3e} (h = 0.5) / {e2:.3e} (h = 0.25) = {ratio:.2}; all acceptance runs so far: {h}"
    );
    ensure((12.0..=20.0).contains(&ratio), || msg.clone())?;
    Ok(msg)
}

/// Seeded 614G state whose 60-day window spans the rise and the peak.
fn recovery_initial(p: &ModelParameters) -> StateVector {
    let mut x = StateVector { s: 0.0, e1: 3e5, e2: 1.5e5, i1: 1e5, i2: 1e5, a: 2e5, r: 0.0 };
    x.s = p.s0() - x.total();
    x
}

fn criterion_7(health: &mut RunHealth) -> Check {
    let truth = Variant::G614.parameters();
    let x0 = recovery_initial(&truth);
    let rc_truth = control_reproduction_number(&truth);
    health.record(&truth, &integrate(&truth, &x0, &IntegratorConfig::days(60.0)).map_err(|e| e.to_string())?);
    let free = [(Param::Beta, 1e-10, 5e-8), (Param::Epsilon, 0.01, 2.0), (Param::Rho, 0.01, 1.0)];

    let mut errors = Vec::new();
    for r in 0..10u64 {
        let data = synthesize_data(&truth, &x0, 60, NoiseModel::LogNormal { sigma: 0.05 }, 1000 + r)
            .map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(r);
        let mut spec = ParameterSpec::fixed(&truth, &x0);
        for (p, lo, hi) in free {
            let guess = (truth.get(p) * rng.random_range(0.7..1.3)).clamp(lo, hi);
            spec.set_param(p, Slot::Free(Bounds::new(lo, hi, guess)));
        }
        let config = FitConfig { seed: r, ..FitConfig::default() };
        let a = fit(&spec, &data, &config).map_err(|e| e.to_string())?;
        let b = fit(&spec, &data, &config).map_err(|e| e.to_string())?;
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        ensure(
            a == b && bits(&a.free_values) == bits(&b.free_values) && a.objective.to_bits() == b.objective.to_bits(),
            || format!("replicate {r}: two fits with seed {r} differ"),
        )?;
        ensure(a.history.windows(2).all(|w| w[1] <= w[0]), || format!("replicate {r}: best objective increased"))?;
        errors.push(rel(a.r_c, rc_truth));
    }
    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    let median = 0.5 * (sorted[4] + sorted[5]);
    let msg = format!(
        "10 replicates: median R_c error {:.2}%, max {:.2}%; histories nonincreasing; refits bitwise identical",
        100.0 * median,
        100.0 * sorted[9]
    );
    ensure(median < 0.05, || msg.clone())?;
    Ok(msg)
}

fn criterion_8(health: &mut RunHealth) -> Check {
    let mut parts = Vec::new();
    for v in Variant::ALL {
        let p = v.parameters();
        let x0 = seeded_state(&p, 100.0);
        let method = Method::default();
        let s = rho_sweep(&p, &x0, &DEFAULT_RHO_GRID, DEFAULT_SWEEP_HORIZON, &method).map_err(|e| e.to_string())?;
        for rho in DEFAULT_RHO_GRID {
            let q = p.with(Param::Rho, rho).unwrap();
            let t =
                integrate(&q, &x0, &IntegratorConfig::days(DEFAULT_SWEEP_HORIZON as f64)).map_err(|e| e.to_string())?;
            health.record(&q, &t);
        }
        let totals: Vec<f64> = s.rows.iter().map(|r| r.cum_total).collect();
        ensure(totals.windows(2).all(|w| w[1] < w[0]), || {
            format!("{v}: cum_total not strictly decreasing: {totals:?}")
        })?;
        let d = decline_percentages(&s).map_err(|e| e.to_string())?;
        let total = d.total.ok_or_else(|| format!("{v}: total decline undefined"))?;
        let share = d.asymptomatic_share.ok_or_else(|| format!("{v}: share decline undefined"))?;
        let count = d.asymptomatic_count.ok_or_else(|| format!("{v}: count decline undefined"))?;
        ensure(total > share, || format!("{v}: total decline {total:.4}% <= asymptomatic share decline {share:.4}%"))?;
        parts.push(format!("{v} total {total:.4}% > share {share:.4}% (count-based, informational: {count:.4}%)"));
    }
    Ok(parts.join("; "))
}

fn criterion_9(health: &mut RunHealth) -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let cli = |cmd: &str, cfg: &str, out: &str, data: Option<&std::path::Path>| {
        let r = run_in(d, cmd, cfg, out, data);
        ensure(r.code == 0, || format!("{cmd} --config {cfg}.toml exited {}: {}", r.code, r.stderr))
    };
    let seeded = "[parameters]\nvariant = \"614G\"\n[initial]\nE1 = 1000\n";
    write(d, "truth.toml", &format!("{seeded}[simulate]\ndays = 90\n"));
    cli("simulate", "truth", "truth", None)?;
    let full = fs::read_to_string(d.join("truth/incidence.csv")).map_err(|e| e.to_string())?;
    let first60: Vec<&str> = full.lines().take(61).collect();
    let data = write(d, "first60.csv", &(first60.join("\n") + "\n"));

    cli("fit", "truth", "fixed", Some(&data))?;
    let exact = json(&d.join("fixed/fit_summary.json"))["objective"].as_f64().unwrap();

    write(
        d,
        "model.toml",
        "[parameters]\nvariant = \"614G\"\nbeta = { lo = 1e-9, hi = 2e-8, guess = 4e-9 }\n\
         rho = { lo = 0.01, hi = 1, guess = 0.3 }\n[initial]\nE1 = 1000\n[fit]\nrel_tol = 1e-12\n[forecast]\nhorizon = 30\n",
    );
    cli("fit", "model", "free", Some(&data))?;
    let fitted = json(&d.join("free/fit_summary.json"))["objective"].as_f64().unwrap();
    cli("predict", "model", "pred", Some(&data))?;
    let truth = column(&d.join("truth/incidence.csv"), "new_confirmed");
    let days = column(&d.join("pred/forecast.csv"), "day");
    let pred = column(&d.join("pred/forecast.csv"), "predicted_new_confirmed");
    ensure(days.first() == Some(&60.0) && pred.len() == 30, || format!("forecast covers days {days:?}"))?;
    let worst = days.iter().zip(&pred).map(|(t, v)| rel(*v, truth[*t as usize])).fold(0.0, f64::max);

    let p = Variant::G614.parameters();
    health.record(&p, &integrate(&p, &seeded_state(&p, 1000.0), &IntegratorConfig::days(90.0)).unwrap());
    let h = health.check()?;
    let msg = format!(
        "objective {exact:.1e} (all fixed), {fitted:.1e} (beta, rho free); forecast days 60-89 worst relative gap {worst:.1e}; nonnegativity and balance over all acceptance runs: {h}"
    );
    ensure(exact < 1e-6 && fitted < 1e-6 && worst <= 1e-6, || msg.clone())?;
    Ok(msg)
}

fn main() -> ExitCode {
    let mut health = RunHealth::default();
    let mut failed = 0;
    let mut report = |n: u8, name: &str, f: &mut dyn FnMut(&mut RunHealth) -> Check| {
        let start = Instant::now();
        let outcome = panic::catch_unwind(panic::AssertUnwindSafe(|| f(&mut health))).unwrap_or_else(|e| {
            Err(format!("panicked: {:?}", e.downcast_ref::<String>().cloned().unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n} ({name}): PASS [{secs:.1}s] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL [{secs:.1}s] {detail}");
            }
        }
    };
    report(1, "NGM vs closed form", &mut |_| criterion_1());
    report(2, "R_c vs oracle", &mut |_| criterion_2());
    report(3, "equilibria", &mut |_| criterion_3());
    report(4, "stability certificates", &mut |_| criterion_4());
    report(5, "Lyapunov audit", &mut criterion_5);
    report(6, "integrator order", &mut criterion_6);
    report(7, "synthetic recovery", &mut criterion_7);
    report(8, "rho sweep", &mut criterion_8);
    report(9, "pipeline round trip", &mut criterion_9);
    if failed == 0 {
        println!("acceptance: all 9 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 9 criteria fail");
        ExitCode::FAILURE
    }
}
