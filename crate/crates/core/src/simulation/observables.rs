use serde::Serialize;

use super::{SimulationError, Trajectory};

/// New detected cases per day. `values[k]` covers day `start_day + k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncidenceSeries {
    pub start_day: usize,
    pub values: Vec<f64>,
}

impl IncidenceSeries {
    pub fn new(values: Vec<f64>) -> Self {
        Self { start_day: 0, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Days `from..to` (absolute day numbers) as a new series.
    pub fn window(&self, from: usize, to: usize) -> IncidenceSeries {
        let lo = from.saturating_sub(self.start_day).min(self.values.len());
        let hi = to.saturating_sub(self.start_day).min(self.values.len()).max(lo);
        IncidenceSeries { start_day: self.start_day + lo, values: self.values[lo..hi].to_vec() }
    }
}

/// Daily inflow into I1: value for day `d` is the I1 counter at `d+1` minus
/// the counter at `d`.
pub fn daily_incidence(traj: &Trajectory) -> Result<IncidenceSeries, SimulationError> {
    if traj.time_at_day(0).is_none() {
        return Err(SimulationError::NotDayAligned);
    }
    let days = traj.day_count();
    if days == 0 {
        return Err(SimulationError::TooShort);
    }
    let values = (0..days)
        .map(|d| {
            let lo = traj.inflows_at_day(d).expect("checkpoint exists").i1;
            let hi = traj.inflows_at_day(d + 1).expect("checkpoint exists").i1;
            // tolerated negative undershoot of E2 can make the difference -0
            (hi - lo).max(0.0)
        })
        .collect();
    Ok(IncidenceSeries::new(values))
}

/// Shares of I1, I2 and A in some total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassShares {
    pub i1: f64,
    pub i2: f64,
    pub a: f64,
}

impl ClassShares {
    fn of(i1: f64, i2: f64, a: f64) -> Option<Self> {
        let total = i1 + i2 + a;
        (total > 0.0).then(|| ClassShares { i1: i1 / total, i2: i2 / total, a: a / total })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassTotals {
    pub cum_i1: f64,
    pub cum_i2: f64,
    pub cum_a: f64,
    /// Shares of cumulative inflow; `None` when nobody was infected.
    pub cumulative_shares: Option<ClassShares>,
    /// Point-prevalence shares `I1 : I2 : A` at the final time.
    pub prevalence_shares: Option<ClassShares>,
}

impl ClassTotals {
    pub fn cum_total(&self) -> f64 {
        self.cum_i1 + self.cum_i2 + self.cum_a
    }
}

pub fn cumulative_by_class(traj: &Trajectory) -> ClassTotals {
    let first = traj.inflows()[0];
    let last = traj.final_inflows();
    let (cum_i1, cum_i2, cum_a) = (last.i1 - first.i1, last.i2 - first.i2, last.a - first.a);
    let x = traj.final_state();
    ClassTotals {
        cum_i1,
        cum_i2,
        cum_a,
        cumulative_shares: ClassShares::of(cum_i1, cum_i2, cum_a),
        prevalence_shares: ClassShares::of(x.i1.max(0.0), x.i2.max(0.0), x.a.max(0.0)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub day: usize,
    pub value: f64,
}

/// Earliest day attaining the maximum.
pub fn peak(series: &IncidenceSeries) -> Result<Peak, SimulationError> {
    let mut best: Option<(usize, f64)> = None;
    for (k, &v) in series.values.iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    best.map(|(k, value)| Peak { day: series.start_day + k, value }).ok_or(SimulationError::EmptySeries)
}
