//! Control reproduction number and the next-generation matrices at the
//! disease-free equilibrium.
//!
//! Infected compartments are ordered `(E1, E2, I1, I2, A)`. New infections
//! only enter E1, so `F` has a single nonzero row and `F V^-1` is rank one:
//! its spectral radius is its trace. The dense eigenvalue route is kept as
//! an independent cross-check.

use nalgebra::SMatrix;

use super::{ModelError, ModelParameters};

pub type Matrix5 = SMatrix<f64, 5, 5>;

/// Closed-form control reproduction number
/// `beta S0 / (sigma+eps+mu) * [sigma/(alpha+mu) + sigma(1-rho)alpha/((alpha+mu)(gamma2+phi2+mu)) + eps omega/(gamma3+mu)]`.
pub fn control_reproduction_number(params: &ModelParameters) -> f64 {
    params.beta() * params.s0() / params.e1_exit_rate() * params.infectiousness_per_e1()
}

/// New-infection matrix `F` and transition matrix `V`, linearized at the DFE.
pub fn next_generation_matrices(params: &ModelParameters) -> (Matrix5, Matrix5) {
    let bs0 = params.beta() * params.s0();
    let mut f = Matrix5::zeros();
    f[(0, 1)] = bs0;
    f[(0, 3)] = bs0;
    f[(0, 4)] = params.omega() * bs0;

    let (alpha, rho) = (params.alpha(), params.rho());
    let mut v = Matrix5::zeros();
    v[(0, 0)] = params.e1_exit_rate();
    v[(1, 0)] = -params.sigma();
    v[(1, 1)] = params.e2_exit_rate();
    v[(2, 1)] = -rho * alpha;
    v[(2, 2)] = params.i1_exit_rate();
    v[(3, 1)] = -(1.0 - rho) * alpha;
    v[(3, 3)] = params.i2_exit_rate();
    v[(4, 0)] = -params.epsilon();
    v[(4, 4)] = params.a_exit_rate();
    (f, v)
}

fn is_lower_triangular(m: &Matrix5) -> bool {
    (0..5).all(|r| (r + 1..5).all(|c| m[(r, c)] == 0.0))
}

/// Inverse of a lower-triangular matrix by forward substitution, one unit
/// column at a time.
fn lower_triangular_inverse(v: &Matrix5) -> Result<Matrix5, ModelError> {
    if (0..5).any(|i| v[(i, i)] == 0.0 || !v[(i, i)].is_finite()) {
        return Err(ModelError::SingularTransitionMatrix);
    }
    let mut inv = Matrix5::zeros();
    for col in 0..5 {
        for row in col..5 {
            let rhs = if row == col { 1.0 } else { 0.0 };
            let acc: f64 = (col..row).map(|k| v[(row, k)] * inv[(k, col)]).sum();
            inv[(row, col)] = (rhs - acc) / v[(row, row)];
        }
    }
    Ok(inv)
}

fn invert(v: &Matrix5) -> Result<Matrix5, ModelError> {
    if is_lower_triangular(v) {
        lower_triangular_inverse(v)
    } else {
        v.try_inverse().ok_or(ModelError::SingularTransitionMatrix)
    }
}

/// True when every nonzero row of `m` is a multiple of a single row.
fn has_rank_at_most_one(m: &Matrix5) -> bool {
    let Some(pivot_row) = (0..5).find(|&r| m.row(r).iter().any(|&x| x != 0.0)) else {
        return true;
    };
    let pivot = m.row(pivot_row).into_owned();
    let pc = pivot.iamax_full().1;
    let scale = pivot.amax();
    (0..5).filter(|&r| r != pivot_row).all(|r| {
        let ratio = m[(r, pc)] / pivot[pc];
        (0..5).all(|c| (m[(r, c)] - ratio * pivot[c]).abs() <= 1e-14 * scale.max(m.row(r).amax()))
    })
}

/// Largest-modulus eigenvalue of `F V^-1`.
///
/// For rank-one `F` (the model's structure) this is `|trace(F V^-1)|` with
/// `V^-1` from forward substitution. Other inputs fall back to the dense
/// eigenvalue routine.
pub fn ngm_spectral_radius(f: &Matrix5, v: &Matrix5) -> Result<f64, ModelError> {
    let k = f * invert(v)?;
    if has_rank_at_most_one(f) {
        Ok(k.trace().abs())
    } else {
        dense_spectral_radius(&k)
    }
}

/// Spectral radius of `F V^-1` through a general nonsymmetric eigenvalue
/// solve. Cross-check for [`ngm_spectral_radius`].
pub fn ngm_spectral_radius_dense(f: &Matrix5, v: &Matrix5) -> Result<f64, ModelError> {
    let vinv = v.try_inverse().ok_or(ModelError::SingularTransitionMatrix)?;
    dense_spectral_radius(&(f * vinv))
}

fn dense_spectral_radius(k: &Matrix5) -> Result<f64, ModelError> {
    let schur = k.try_schur(f64::EPSILON, 10_000).ok_or(ModelError::EigenNonConvergence)?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max))
}
