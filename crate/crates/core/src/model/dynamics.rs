use nalgebra::SMatrix;

use super::{ModelError, ModelParameters, StateVector};

pub type Jacobian = SMatrix<f64, 7, 7>;

/// Vector field on raw arrays; no finiteness checks. Shared with the
/// integrator hot loop.
#[inline]
pub(crate) fn rhs_raw(x: &[f64; 7], p: &ModelParameters) -> [f64; 7] {
    let v = p.values();
    let [s, e1, e2, i1, i2, a, r] = *x;
    let infection = v.beta * s * (e2 + i2 + v.omega * a);
    // Lambda - mu S written as mu (S0 - S): vanishes exactly at S = S0
    [
        v.mu * (p.s0() - s) - infection,
        infection - p.e1_exit_rate() * e1,
        v.sigma * e1 - p.e2_exit_rate() * e2,
        v.rho * v.alpha * e2 - p.i1_exit_rate() * i1,
        (1.0 - v.rho) * v.alpha * e2 - p.i2_exit_rate() * i2,
        v.epsilon * e1 - p.a_exit_rate() * a,
        v.gamma1 * i1 + v.gamma2 * i2 + v.gamma3 * a - v.mu * r,
    ]
}

/// Time derivative of the seven compartments.
pub fn rhs(state: &StateVector, params: &ModelParameters) -> Result<StateVector, ModelError> {
    state.check_finite()?;
    Ok(StateVector::from_array(rhs_raw(&state.to_array(), params)))
}

/// Net change of total population: `Lambda - mu N - phi1 I1 - phi2 I2`.
pub fn population_balance(state: &StateVector, params: &ModelParameters) -> Result<f64, ModelError> {
    state.check_finite()?;
    Ok(params.mu() * (params.s0() - state.total()) - params.phi1() * state.i1 - params.phi2() * state.i2)
}

/// Analytic Jacobian of [`rhs`] with respect to the state.
pub fn jacobian(state: &StateVector, params: &ModelParameters) -> Result<Jacobian, ModelError> {
    state.check_finite()?;
    let v = params.values();
    let load = state.infectious_load(v.omega);
    let bs = v.beta * state.s;
    let mut j = Jacobian::zeros();

    // S
    j[(0, 0)] = -v.beta * load - v.mu;
    j[(0, 2)] = -bs;
    j[(0, 4)] = -bs;
    j[(0, 5)] = -bs * v.omega;
    // E1
    j[(1, 0)] = v.beta * load;
    j[(1, 1)] = -params.e1_exit_rate();
    j[(1, 2)] = bs;
    j[(1, 4)] = bs;
    j[(1, 5)] = bs * v.omega;
    // E2
    j[(2, 1)] = v.sigma;
    j[(2, 2)] = -params.e2_exit_rate();
    // I1
    j[(3, 2)] = v.rho * v.alpha;
    j[(3, 3)] = -params.i1_exit_rate();
    // I2
    j[(4, 2)] = (1.0 - v.rho) * v.alpha;
    j[(4, 4)] = -params.i2_exit_rate();
    // A
    j[(5, 1)] = v.epsilon;
    j[(5, 5)] = -params.a_exit_rate();
    // R
    j[(6, 3)] = v.gamma1;
    j[(6, 4)] = v.gamma2;
    j[(6, 5)] = v.gamma3;
    j[(6, 6)] = -v.mu;
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{next_generation_matrices, Variant};
    use proptest::prelude::*;

    fn g614() -> ModelParameters {
        Variant::G614.parameters()
    }

    #[test]
    fn dfe_is_stationary() {
        for v in Variant::ALL {
            let p = v.parameters();
            let dfe = StateVector { s: p.s0(), ..StateVector::ZERO };
            assert_eq!(rhs(&dfe, &p).unwrap(), StateVector::ZERO);
            assert_eq!(population_balance(&dfe, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn empty_population_only_recruits() {
        let p = g614();
        let d = rhs(&StateVector::ZERO, &p).unwrap();
        // mu * (Lambda / mu) is Lambda up to one rounding
        assert!((d.s - p.lambda()).abs() <= 2.0 * f64::EPSILON * p.lambda());
        assert_eq!(StateVector { s: 0.0, ..d }, StateVector::ZERO);
        let bal = population_balance(&StateVector::ZERO, &p).unwrap();
        assert!((bal - p.lambda()).abs() <= 2.0 * f64::EPSILON * p.lambda());
    }

    #[test]
    fn non_finite_state_is_rejected() {
        let p = g614();
        let bad = StateVector { i2: f64::INFINITY, ..StateVector::ZERO };
        assert!(matches!(rhs(&bad, &p), Err(ModelError::NonFinite("I2"))));
        assert!(jacobian(&bad, &p).is_err());
        assert!(population_balance(&bad, &p).is_err());
    }

    #[test]
    fn recovered_diagonal_is_minus_mu() {
        let p = g614();
        let x = StateVector { s: 5e7, e1: 10.0, e2: 3.0, i1: 4.0, i2: 1.0, a: 2.0, r: 100.0 };
        assert_eq!(jacobian(&x, &p).unwrap()[(6, 6)], -p.mu());
    }

    #[test]
    fn dfe_infected_block_is_f_minus_v() {
        let p = g614();
        let dfe = StateVector { s: p.s0(), ..StateVector::ZERO };
        let j = jacobian(&dfe, &p).unwrap();
        let (f, v) = next_generation_matrices(&p);
        let expected = f - v;
        for r in 0..5 {
            for c in 0..5 {
                let got = j[(r + 1, c + 1)];
                assert!((got - expected[(r, c)]).abs() <= 1e-15 * expected[(r, c)].abs().max(1.0));
            }
        }
        // S and R rows do not feed the infected block at the DFE
        for r in 1..6 {
            assert_eq!(j[(r, 0)], 0.0);
            assert_eq!(j[(r, 6)], 0.0);
        }
    }

    fn central_difference(x: &StateVector, p: &ModelParameters) -> Jacobian {
        let base = x.to_array();
        let mut j = Jacobian::zeros();
        for c in 0..7 {
            let h = 1e-4 * (1.0 + base[c].abs());
            let mut plus = base;
            let mut minus = base;
            plus[c] += h;
            minus[c] -= h;
            let fp = rhs(&StateVector::from_array(plus), p).unwrap().to_array();
            let fm = rhs(&StateVector::from_array(minus), p).unwrap().to_array();
            for r in 0..7 {
                j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        j
    }

    fn positive_state() -> impl Strategy<Value = StateVector> {
        (1e6..7e7f64, 0.0..1e5f64, 0.0..1e5f64, 0.0..1e5f64, 0.0..1e5f64, 0.0..1e5f64, 0.0..1e6f64)
            .prop_map(|(s, e1, e2, i1, i2, a, r)| StateVector { s, e1, e2, i1, i2, a, r })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn jacobian_matches_finite_differences(x in positive_state()) {
            let p = g614();
            let exact = jacobian(&x, &p).unwrap();
            let fd = central_difference(&x, &p);
            for r in 0..7 {
                for c in 0..7 {
                    let e = exact[(r, c)];
                    let err = (e - fd[(r, c)]).abs();
                    prop_assert!(err <= 1e-5 * e.abs(),
                        "entry ({r},{c}): analytic {e}, fd {}", fd[(r, c)]);
                }
            }
        }

        #[test]
        fn rhs_sum_equals_population_balance(x in positive_state()) {
            let p = g614();
            let sum: f64 = rhs(&x, &p).unwrap().to_array().iter().sum();
            let bal = population_balance(&x, &p).unwrap();
            // relative to the size of the largest flow being summed
            let scale = p.lambda() + p.mu() * x.total() + p.beta() * x.s * x.infectious_load(p.omega()) + x.max_abs();
            prop_assert!((sum - bal).abs() <= 1e-12 * scale, "sum {sum} balance {bal}");
        }
    }
}
