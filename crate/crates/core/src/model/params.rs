use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Names of the thirteen rates and weights of the model.
///
/// The declaration order is the canonical order used everywhere a parameter
/// vector is flattened (calibration, CSV output).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Param {
    Lambda,
    Mu,
    Beta,
    Sigma,
    Epsilon,
    Alpha,
    Omega,
    Rho,
    Gamma1,
    Gamma2,
    Gamma3,
    Phi1,
    Phi2,
}

impl Param {
    pub const ALL: [Param; 13] = [
        Param::Lambda,
        Param::Mu,
        Param::Beta,
        Param::Sigma,
        Param::Epsilon,
        Param::Alpha,
        Param::Omega,
        Param::Rho,
        Param::Gamma1,
        Param::Gamma2,
        Param::Gamma3,
        Param::Phi1,
        Param::Phi2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::Lambda => "Lambda",
            Param::Mu => "mu",
            Param::Beta => "beta",
            Param::Sigma => "sigma",
            Param::Epsilon => "epsilon",
            Param::Alpha => "alpha",
            Param::Omega => "omega",
            Param::Rho => "rho",
            Param::Gamma1 => "gamma1",
            Param::Gamma2 => "gamma2",
            Param::Gamma3 => "gamma3",
            Param::Phi1 => "phi1",
            Param::Phi2 => "phi2",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// True for the dimensionless weights confined to `[0, 1]`.
    pub fn is_fraction(self) -> bool {
        matches!(self, Param::Rho | Param::Omega)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Param::ALL.iter().copied().find(|p| p.name() == s).ok_or_else(|| ModelError::UnknownParameter(s.to_string()))
    }
}

/// Raw, unvalidated parameter values. Convert with [`ModelParameters::new`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ParameterSet {
    /// Daily recruitment (births), persons/day.
    pub lambda: f64,
    /// Natural mortality rate, 1/day.
    pub mu: f64,
    /// Basal transmission rate, 1/(person day).
    pub beta: f64,
    /// E1 -> E2 conversion rate.
    pub sigma: f64,
    /// E1 -> A conversion rate.
    pub epsilon: f64,
    /// E2 -> I1/I2 conversion rate.
    pub alpha: f64,
    /// Relative infectiousness of asymptomatic carriers.
    pub omega: f64,
    /// Detected fraction of symptomatic infections.
    pub rho: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl ParameterSet {
    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::Lambda => self.lambda,
            Param::Mu => self.mu,
            Param::Beta => self.beta,
            Param::Sigma => self.sigma,
            Param::Epsilon => self.epsilon,
            Param::Alpha => self.alpha,
            Param::Omega => self.omega,
            Param::Rho => self.rho,
            Param::Gamma1 => self.gamma1,
            Param::Gamma2 => self.gamma2,
            Param::Gamma3 => self.gamma3,
            Param::Phi1 => self.phi1,
            Param::Phi2 => self.phi2,
        }
    }

    pub fn set(&mut self, p: Param, value: f64) {
        let slot = match p {
            Param::Lambda => &mut self.lambda,
            Param::Mu => &mut self.mu,
            Param::Beta => &mut self.beta,
            Param::Sigma => &mut self.sigma,
            Param::Epsilon => &mut self.epsilon,
            Param::Alpha => &mut self.alpha,
            Param::Omega => &mut self.omega,
            Param::Rho => &mut self.rho,
            Param::Gamma1 => &mut self.gamma1,
            Param::Gamma2 => &mut self.gamma2,
            Param::Gamma3 => &mut self.gamma3,
            Param::Phi1 => &mut self.phi1,
            Param::Phi2 => &mut self.phi2,
        };
        *slot = value;
    }
}

/// The four fitted parameter sets of the reference study (England 2020-2021,
/// Shanghai 2022).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    G614,
    Alpha,
    Delta,
    Omicron,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::G614, Variant::Alpha, Variant::Delta, Variant::Omicron];

    pub fn label(self) -> &'static str {
        match self {
            Variant::G614 => "614G",
            Variant::Alpha => "Alpha",
            Variant::Delta => "Delta",
            Variant::Omicron => "Omicron",
        }
    }

    pub fn parameter_set(self) -> ParameterSet {
        // shared across all four columns
        let base = ParameterSet {
            lambda: 1740.0,
            mu: 2.5753e-5,
            beta: 0.0,
            sigma: 0.1975,
            epsilon: 0.0,
            alpha: 0.5,
            omega: 0.6524,
            rho: 0.0,
            gamma1: 0.0588,
            gamma2: 0.0,
            gamma3: 0.0,
            phi1: 1.7826e-5,
            phi2: 0.0,
        };
        match self {
            Variant::G614 => ParameterSet {
                beta: 5.3720e-9,
                epsilon: 0.3415,
                rho: 0.4689,
                gamma2: 0.0769,
                gamma3: 0.2770,
                phi2: 5.5963e-3,
                ..base
            },
            Variant::Alpha => ParameterSet {
                beta: 7.2151e-9,
                epsilon: 0.5748,
                rho: 0.1103,
                gamma2: 0.0811,
                gamma3: 0.3746,
                phi2: 4.4054e-3,
                ..base
            },
            Variant::Delta => ParameterSet {
                beta: 9.0205e-9,
                epsilon: 0.6768,
                rho: 0.2266,
                gamma2: 0.0704,
                gamma3: 0.4810,
                phi2: 5.0410e-3,
                ..base
            },
            Variant::Omicron => ParameterSet {
                lambda: 216.0,
                mu: 2.4303e-5,
                beta: 3.2493e-8,
                epsilon: 0.5745,
                rho: 0.5266,
                gamma2: 0.0537,
                gamma3: 0.4149,
                phi2: 5.0179e-3,
                ..base
            },
        }
    }

    pub fn parameters(self) -> ModelParameters {
        ModelParameters::new(self.parameter_set()).expect("reference parameter sets are valid")
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "614g" | "g614" => Ok(Variant::G614),
            "alpha" => Ok(Variant::Alpha),
            "delta" => Ok(Variant::Delta),
            "omicron" => Ok(Variant::Omicron),
            _ => Err(ModelError::UnknownVariant(s.to_string())),
        }
    }
}

/// Validated model parameters.
///
/// Every rate is finite and nonnegative, `mu > 0`, and `rho`, `omega` lie in
/// `[0, 1]`. Downstream formulas rely on these without rechecking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ModelParameters(ParameterSet);

impl ModelParameters {
    pub fn new(values: ParameterSet) -> Result<Self, ModelError> {
        for p in Param::ALL {
            let v = values.get(p);
            if !v.is_finite() {
                return Err(ModelError::InvalidParameter { param: p, value: v, reason: "not finite" });
            }
            if v < 0.0 {
                return Err(ModelError::InvalidParameter { param: p, value: v, reason: "negative" });
            }
            if p.is_fraction() && v > 1.0 {
                return Err(ModelError::InvalidParameter { param: p, value: v, reason: "must lie in [0, 1]" });
            }
        }
        if values.mu <= 0.0 {
            return Err(ModelError::InvalidParameter {
                param: Param::Mu,
                value: values.mu,
                reason: "must be positive (S0 = Lambda/mu)",
            });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &ParameterSet {
        &self.0
    }

    pub fn get(&self, p: Param) -> f64 {
        self.0.get(p)
    }

    /// Copy with one parameter replaced, revalidated.
    pub fn with(&self, p: Param, value: f64) -> Result<Self, ModelError> {
        let mut v = self.0;
        v.set(p, value);
        Self::new(v)
    }

    pub fn lambda(&self) -> f64 {
        self.0.lambda
    }
    pub fn mu(&self) -> f64 {
        self.0.mu
    }
    pub fn beta(&self) -> f64 {
        self.0.beta
    }
    pub fn sigma(&self) -> f64 {
        self.0.sigma
    }
    pub fn epsilon(&self) -> f64 {
        self.0.epsilon
    }
    pub fn alpha(&self) -> f64 {
        self.0.alpha
    }
    pub fn omega(&self) -> f64 {
        self.0.omega
    }
    pub fn rho(&self) -> f64 {
        self.0.rho
    }
    pub fn gamma1(&self) -> f64 {
        self.0.gamma1
    }
    pub fn gamma2(&self) -> f64 {
        self.0.gamma2
    }
    pub fn gamma3(&self) -> f64 {
        self.0.gamma3
    }
    pub fn phi1(&self) -> f64 {
        self.0.phi1
    }
    pub fn phi2(&self) -> f64 {
        self.0.phi2
    }

    /// Disease-free susceptible population `Lambda / mu`.
    pub fn s0(&self) -> f64 {
        self.0.lambda / self.0.mu
    }

    /// Total exit rate from E1.
    pub fn e1_exit_rate(&self) -> f64 {
        self.0.sigma + self.0.epsilon + self.0.mu
    }

    /// Total exit rate from E2.
    pub fn e2_exit_rate(&self) -> f64 {
        self.0.alpha + self.0.mu
    }

    pub fn i1_exit_rate(&self) -> f64 {
        self.0.gamma1 + self.0.phi1 + self.0.mu
    }

    pub fn i2_exit_rate(&self) -> f64 {
        self.0.gamma2 + self.0.phi2 + self.0.mu
    }

    pub fn a_exit_rate(&self) -> f64 {
        self.0.gamma3 + self.0.mu
    }

    /// Expected infectious exposure generated per entrant into E1, per unit
    /// `beta * S`: the bracketed sum shared by the reproduction number and
    /// the endemic equilibrium.
    pub fn infectiousness_per_e1(&self) -> f64 {
        let b1 = self.e2_exit_rate();
        let b2 = self.i2_exit_rate();
        let b3 = self.a_exit_rate();
        let v = &self.0;
        v.sigma / b1 + v.sigma * (1.0 - v.rho) * v.alpha / (b1 * b2) + v.epsilon * v.omega / b3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sets_validate() {
        for v in Variant::ALL {
            let p = v.parameters();
            assert!(p.mu() > 0.0);
        }
    }

    #[test]
    fn rejects_out_of_range_fractions() {
        let base = Variant::G614.parameters();
        assert!(base.with(Param::Rho, 1.2).is_err());
        assert!(base.with(Param::Omega, -0.1).is_err());
        assert!(base.with(Param::Rho, 1.0).is_ok());
    }

    #[test]
    fn rejects_negative_rates_and_zero_mu() {
        let base = Variant::G614.parameters();
        for p in Param::ALL {
            assert!(base.with(p, -1e-9).is_err(), "{p} accepted a negative value");
        }
        let err = base.with(Param::Mu, 0.0).unwrap_err();
        assert!(matches!(err, ModelError::InvalidParameter { param: Param::Mu, .. }));
        assert!(base.with(Param::Beta, f64::NAN).is_err());
    }

    #[test]
    fn names_round_trip() {
        for p in Param::ALL {
            assert_eq!(p.name().parse::<Param>().unwrap(), p);
        }
        assert!("Beta".parse::<Param>().is_err());
        assert_eq!("614G".parse::<Variant>().unwrap(), Variant::G614);
    }

    #[test]
    fn disease_free_population() {
        let s0 = Variant::G614.parameters().s0();
        assert!((s0 - 6.7564943890032229e7).abs() / s0 < 1e-12);
        let s0 = Variant::Omicron.parameters().s0();
        assert!((s0 - 8.8877916306628811e6).abs() / s0 < 1e-12);
    }
}
