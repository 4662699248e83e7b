//! Random model parameters for property tests.

use rand::Rng;

use crate::model::{ModelParameters, Param, Variant};

/// A reference variant with every rate scaled by a log-uniform factor in
/// `[0.5, 2]` and the fractions `rho`, `omega` drawn from `[0, 1]`.
pub fn random_parameters<R: Rng>(rng: &mut R) -> ModelParameters {
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
    ModelParameters::new(set).expect("draws stay in the valid domain")
}
