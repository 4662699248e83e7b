use serde::Serialize;

use super::{control_reproduction_number, rhs_raw, ModelParameters, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumKind {
    DiseaseFree,
    Endemic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumPoint {
    pub kind: EquilibriumKind,
    pub state: StateVector,
}

impl EquilibriumPoint {
    /// `||rhs(state)||_inf`.
    pub fn residual(&self, params: &ModelParameters) -> f64 {
        rhs_raw(&self.state.to_array(), params).iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Residual bound accepted for an equilibrium: `1e-8 * max(Lambda, 1)`.
    pub fn tolerance(params: &ModelParameters) -> f64 {
        1e-8 * params.lambda().max(1.0)
    }

    pub fn is_within_tolerance(&self, params: &ModelParameters) -> bool {
        self.residual(params) <= Self::tolerance(params)
    }
}

/// `P0 = (Lambda/mu, 0, 0, 0, 0, 0, 0)`.
pub fn disease_free_equilibrium(params: &ModelParameters) -> EquilibriumPoint {
    EquilibriumPoint { kind: EquilibriumKind::DiseaseFree, state: StateVector { s: params.s0(), ..StateVector::ZERO } }
}

/// The unique positive equilibrium, present only when `R_c > 1`.
pub fn endemic_equilibrium(params: &ModelParameters) -> Option<EquilibriumPoint> {
    let rc = control_reproduction_number(params);
    if rc <= 1.0 {
        return None;
    }
    let v = params.values();
    let (b1, b2, b3) = (params.e2_exit_rate(), params.i2_exit_rate(), params.a_exit_rate());
    let e1 = endemic_e1(params, rc);

    let s = v.lambda / (v.beta * e1 * params.infectiousness_per_e1() + v.mu);
    let e2 = v.sigma / b1 * e1;
    let i1 = v.sigma * v.rho * v.alpha / (b1 * params.i1_exit_rate()) * e1;
    let i2 = v.sigma * (1.0 - v.rho) * v.alpha / (b1 * b2) * e1;
    let a = v.epsilon / b3 * e1;
    let r = e1 / v.mu
        * (v.sigma * v.rho * v.alpha * v.gamma1 / (b1 * params.i1_exit_rate())
            + v.sigma * (1.0 - v.rho) * v.alpha * v.gamma2 / (b1 * b2)
            + v.epsilon * v.gamma3 / b3);

    Some(EquilibriumPoint { kind: EquilibriumKind::Endemic, state: StateVector { s, e1, e2, i1, i2, a, r } })
}

/// Positive root `Lambda (R_c - 1) / ((sigma+eps+mu) R_c)`.
fn endemic_e1(params: &ModelParameters, rc: f64) -> f64 {
    params.lambda() * (rc - 1.0) / (params.e1_exit_rate() * rc)
}
