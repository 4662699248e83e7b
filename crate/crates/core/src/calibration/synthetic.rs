use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use super::{modeled_incidence, CalibrationError, ObservedSeries};
use crate::model::{ModelParameters, StateVector};
use crate::simulation::Method;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    None,
    /// Each day multiplied by `exp(sigma Z)`, `Z` standard normal.
    LogNormal {
        sigma: f64,
    },
    /// Round to the nearest integer.
    Rounding,
}

/// Simulated daily incidence over `days` days with optional observation
/// noise, deterministic for a given seed.
pub fn synthesize_data(
    params: &ModelParameters,
    initial: &StateVector,
    days: usize,
    noise: NoiseModel,
    seed: u64,
) -> Result<ObservedSeries, CalibrationError> {
    if days == 0 {
        return Err(CalibrationError::InvalidData("need at least one day".into()));
    }
    let mut counts = modeled_incidence(params, initial, days, &Method::default())?;
    match noise {
        NoiseModel::None => {}
        NoiseModel::Rounding => counts.iter_mut().for_each(|c| *c = c.round()),
        NoiseModel::LogNormal { sigma } => {
            let dist = LogNormal::new(0.0, sigma)
                .map_err(|e| CalibrationError::InvalidData(format!("log-normal sigma {sigma}: {e}")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            counts.iter_mut().for_each(|c| *c *= dist.sample(&mut rng));
        }
    }
    ObservedSeries::new(None, counts)
}
