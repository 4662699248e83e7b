//! Local stability of equilibria, the threshold quartic, and the Lyapunov
//! function for the disease-free state.

mod lyapunov;
mod quartic;

pub use lyapunov::{
    audit_initial_conditions, default_audit_horizon, entropy_h, lyapunov_audit, lyapunov_audit_all,
    lyapunov_derivative, lyapunov_value, AuditSummary, LyapunovAudit, AUDIT_ABS_TOL, CONVERGENCE_TOLERANCE,
    MONOTONICITY_SLACK,
};
pub use quartic::{positive_root_certificate, quartic_coefficients, QuarticCoefficients, RootBracket};

use nalgebra::Complex;
use serde::Serialize;
use thiserror::Error;

use crate::model::{
    control_reproduction_number, disease_free_equilibrium, endemic_equilibrium, jacobian, EquilibriumKind,
    EquilibriumPoint, ModelError, ModelParameters,
};
use crate::simulation::SimulationError;

#[derive(Debug, Error, PartialEq)]
pub enum StabilityError {
    #[error("state is not an equilibrium: residual {residual:e} exceeds tolerance {tolerance:e}")]
    NotAnEquilibrium { residual: f64, tolerance: f64 },
    #[error("eigenvalue iteration did not converge")]
    EigenNonConvergence,
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Precondition(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Stable,
    Unstable,
    /// Leading real part within the numerical margin of zero.
    Marginal,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub kind: EquilibriumKind,
    pub equilibrium: EquilibriumPoint,
    /// Jacobian eigenvalues as `(re, im)`, sorted by real part, largest first.
    pub eigenvalues: Vec<(f64, f64)>,
    pub max_real_part: f64,
    /// Half-width of the band around zero reported as marginal.
    pub margin: f64,
    pub verdict: Verdict,
}

/// Relative width of the marginal band, against the largest diagonal rate.
pub const MARGIN_FACTOR: f64 = 1e-8;

/// Eigenvalues of the Jacobian at `eq` and the resulting local verdict.
pub fn classify_equilibrium(
    params: &ModelParameters,
    eq: &EquilibriumPoint,
) -> Result<StabilityReport, StabilityError> {
    let residual = eq.residual(params);
    let tolerance = EquilibriumPoint::tolerance(params);
    if !(residual <= tolerance) {
        return Err(StabilityError::NotAnEquilibrium { residual, tolerance });
    }
    let j = jacobian(&eq.state, params)?;
    let schur = j.try_schur(f64::EPSILON, 10_000).ok_or(StabilityError::EigenNonConvergence)?;
    let mut eigenvalues: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));

    let max_real_part = eigenvalues[0].re;
    let rate_scale = j.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let margin = MARGIN_FACTOR * rate_scale;
    let verdict = if max_real_part.abs() <= margin {
        Verdict::Marginal
    } else if max_real_part < 0.0 {
        Verdict::Stable
    } else {
        Verdict::Unstable
    };
    Ok(StabilityReport {
        kind: eq.kind,
        equilibrium: *eq,
        eigenvalues: eigenvalues.iter().map(|z| (z.re, z.im)).collect(),
        max_real_part,
        margin,
        verdict,
    })
}

/// Everything the threshold analysis says about one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityAnalysis {
    pub r_c: f64,
    pub quartic: QuarticCoefficients,
    /// Positive real root of the quartic, refined to `1e-10`, when `a4 < 0`.
    pub positive_root: Option<f64>,
    pub disease_free: StabilityReport,
    pub endemic: Option<StabilityReport>,
    /// Present when an audit was requested and `R_c < 1`.
    pub lyapunov: Option<AuditSummary>,
}

/// Settings for the simulation audit of the Lyapunov function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditOptions {
    pub seeds: usize,
    pub seed: u64,
    /// Days; `None` uses [`default_audit_horizon`].
    pub horizon: Option<f64>,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { seeds: 20, seed: 0x5eed, horizon: None }
    }
}

/// Threshold, quartic and local verdicts; with `audit`, also the Lyapunov
/// audit from seeded initial conditions when `R_c < 1`.
pub fn analyze(params: &ModelParameters, audit: Option<&AuditOptions>) -> Result<StabilityAnalysis, StabilityError> {
    let r_c = control_reproduction_number(params);
    let quartic = quartic_coefficients(params);
    let positive_root = positive_root_certificate(&quartic).map(|b| b.refine(&quartic, 1e-10));
    let disease_free = classify_equilibrium(params, &disease_free_equilibrium(params))?;
    let endemic = endemic_equilibrium(params).map(|e| classify_equilibrium(params, &e)).transpose()?;
    let lyapunov = match audit {
        Some(opts) if r_c < 1.0 => {
            let initials = audit_initial_conditions(params, opts.seeds, opts.seed);
            let horizon = opts.horizon.unwrap_or_else(|| default_audit_horizon(params));
            Some(AuditSummary::from_audits(&lyapunov_audit_all(params, &initials, horizon)?))
        }
        _ => None,
    };
    Ok(StabilityAnalysis { r_c, quartic, positive_root, disease_free, endemic, lyapunov })
}
