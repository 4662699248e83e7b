use serde::Serialize;

use super::{CalibrationError, ObservedSeries};
use crate::model::{ModelParameters, Param, ParameterSet, StateVector, COMPARTMENTS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
    pub guess: f64,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64, guess: f64) -> Self {
        Bounds { lo, hi, guess }
    }

    fn check(&self, what: &str) -> Result<(), CalibrationError> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.guess.is_finite()) {
            return Err(CalibrationError::InvalidSpec(format!("{what}: bounds must be finite")));
        }
        if !(self.lo <= self.guess && self.guess <= self.hi) {
            return Err(CalibrationError::InvalidSpec(format!(
                "{what}: need lo <= guess <= hi, got [{}, {}] with guess {}",
                self.lo, self.hi, self.guess
            )));
        }
        Ok(())
    }
}

/// Status of one model parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Slot {
    Fixed(f64),
    Free(Bounds),
}

/// Status of one initial-condition component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum InitialSlot {
    Fixed(f64),
    Free(Bounds),
    /// I1 only: first observed count times the mean I1 residence time.
    FromData,
    /// S only: S0 minus everything else.
    Derived,
}

impl Slot {
    pub fn status(&self) -> &'static str {
        match self {
            Slot::Fixed(_) => "fixed",
            Slot::Free(_) => "free",
        }
    }
}

impl InitialSlot {
    pub fn status(&self) -> &'static str {
        match self {
            InitialSlot::Fixed(_) => "fixed",
            InitialSlot::Free(_) => "free",
            InitialSlot::FromData => "from_data",
            InitialSlot::Derived => "derived",
        }
    }
}

const S: usize = 0;
const I1: usize = 3;

/// Which parameters and initial values are estimated, and how.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSpec {
    params: [Slot; 13],
    initial: [InitialSlot; 7],
}

/// Free parameters by default: transmission, asymptomatic routing,
/// detection, and the undetected recovery and death rates.
pub const DEFAULT_FREE: [Param; 5] = [Param::Beta, Param::Epsilon, Param::Rho, Param::Gamma2, Param::Phi2];

/// Upper bound for free initial compartments by default.
pub const DEFAULT_INITIAL_MAX: f64 = 1e6;

impl ParameterSpec {
    /// Everything fixed at the given values; S(0) taken as given too.
    pub fn fixed(params: &ModelParameters, initial: &StateVector) -> Self {
        let p = params.values();
        ParameterSpec {
            params: std::array::from_fn(|i| Slot::Fixed(p.get(Param::ALL[i]))),
            initial: initial.to_array().map(InitialSlot::Fixed),
        }
    }

    /// The default estimation problem around `params`: [`DEFAULT_FREE`]
    /// free within a factor of ten of their value (`rho` on `[0, 1]`),
    /// E1, E2, I2 and A free on `[0, 1e6]`, I1 from data, R fixed at zero and
    /// S derived.
    pub fn default_for(params: &ModelParameters) -> Self {
        let mut spec = Self::fixed(params, &StateVector::ZERO);
        for p in DEFAULT_FREE {
            let v = params.get(p);
            let b = if p.is_fraction() { Bounds::new(0.0, 1.0, v) } else { Bounds::new(v / 10.0, v * 10.0, v) };
            spec.params[p.index()] = Slot::Free(b);
        }
        for i in [1, 2, 4, 5] {
            spec.initial[i] = InitialSlot::Free(Bounds::new(0.0, DEFAULT_INITIAL_MAX, 0.0));
        }
        spec.initial[I1] = InitialSlot::FromData;
        spec.initial[S] = InitialSlot::Derived;
        spec
    }

    pub fn param(&self, p: Param) -> Slot {
        self.params[p.index()]
    }

    pub fn set_param(&mut self, p: Param, slot: Slot) -> &mut Self {
        self.params[p.index()] = slot;
        self
    }

    /// Slot of compartment `index` in `COMPARTMENTS` order.
    pub fn initial(&self, index: usize) -> InitialSlot {
        self.initial[index]
    }

    pub fn set_initial(&mut self, index: usize, slot: InitialSlot) -> &mut Self {
        self.initial[index] = slot;
        self
    }

    pub fn validate(&self) -> Result<(), CalibrationError> {
        for (p, slot) in Param::ALL.iter().zip(&self.params) {
            match slot {
                Slot::Free(b) => b.check(p.name())?,
                Slot::Fixed(v) if !v.is_finite() => {
                    return Err(CalibrationError::InvalidSpec(format!("{}: fixed value must be finite", p.name())))
                }
                Slot::Fixed(_) => {}
            }
        }
        for (i, slot) in self.initial.iter().enumerate() {
            let name = COMPARTMENTS[i];
            match slot {
                InitialSlot::Free(b) => b.check(&format!("{name}(0)"))?,
                InitialSlot::Fixed(v) if !(v.is_finite() && *v >= 0.0) => {
                    return Err(CalibrationError::InvalidSpec(format!("{name}(0): must be finite and >= 0")))
                }
                InitialSlot::FromData if i != I1 => {
                    return Err(CalibrationError::InvalidSpec(format!("{name}(0): only I1 can come from data")))
                }
                InitialSlot::Derived if i != S => {
                    return Err(CalibrationError::InvalidSpec(format!("{name}(0): only S can be derived")))
                }
                _ => {}
            }
        }
        // the guess must be a valid parameter set
        self.parameters_at(&self.guess())?;
        Ok(())
    }

    fn free_bounds(&self) -> Vec<Bounds> {
        let p = self.params.iter().filter_map(|s| match s {
            Slot::Free(b) => Some(*b),
            Slot::Fixed(_) => None,
        });
        let x = self.initial.iter().filter_map(|s| match s {
            InitialSlot::Free(b) => Some(*b),
            _ => None,
        });
        p.chain(x).collect()
    }

    /// Free quantities in canonical order: parameters, then initial values.
    pub fn free_names(&self) -> Vec<String> {
        let p = Param::ALL
            .iter()
            .zip(&self.params)
            .filter(|(_, s)| matches!(s, Slot::Free(_)))
            .map(|(p, _)| p.name().to_string());
        let x = COMPARTMENTS
            .iter()
            .zip(&self.initial)
            .filter(|(_, s)| matches!(s, InitialSlot::Free(_)))
            .map(|(c, _)| format!("{c}(0)"));
        p.chain(x).collect()
    }

    pub fn dimension(&self) -> usize {
        self.free_bounds().len()
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.free_bounds().iter().map(|b| (b.lo, b.hi)).collect()
    }

    pub fn guess(&self) -> Vec<f64> {
        self.free_bounds().iter().map(|b| b.guess).collect()
    }

    fn parameters_at(&self, free: &[f64]) -> Result<ModelParameters, CalibrationError> {
        let mut values = ParameterSet::default();
        let mut k = 0;
        for (p, slot) in Param::ALL.iter().zip(&self.params) {
            let v = match slot {
                Slot::Fixed(v) => *v,
                Slot::Free(_) => {
                    k += 1;
                    free[k - 1]
                }
            };
            values.set(*p, v);
        }
        Ok(ModelParameters::new(values)?)
    }

    /// Full parameters and initial state for a vector of free values.
    pub fn assemble(
        &self,
        free: &[f64],
        data: &ObservedSeries,
    ) -> Result<(ModelParameters, StateVector), CalibrationError> {
        let n = self.dimension();
        if free.len() != n {
            return Err(CalibrationError::WrongDimension { expected: n, got: free.len() });
        }
        let params = self.parameters_at(free)?;
        let mut k = self.params.iter().filter(|s| matches!(s, Slot::Free(_))).count();
        let mut x = [0.0; 7];
        for (i, slot) in self.initial.iter().enumerate() {
            x[i] = match slot {
                InitialSlot::Fixed(v) => *v,
                InitialSlot::Free(_) => {
                    k += 1;
                    free[k - 1]
                }
                InitialSlot::FromData => data.counts[0] / params.i1_exit_rate(),
                InitialSlot::Derived => 0.0,
            };
        }
        if matches!(self.initial[S], InitialSlot::Derived) {
            x[S] = params.s0() - x[1..].iter().sum::<f64>();
        }
        if let Some(i) = x.iter().position(|v| !(*v >= 0.0)) {
            return Err(CalibrationError::InvalidSpec(format!("{}(0) = {} is negative", COMPARTMENTS[i], x[i])));
        }
        Ok((params, StateVector::from_array(x)))
    }
}
