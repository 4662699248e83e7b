//! Daily case series files.
//!
//! Two layouts are accepted, both with a mandatory header:
//! `date,new_confirmed` (ISO dates, one per day, nonnegative integer counts)
//! and `day,new_confirmed` (day index 0, 1, 2, ... and nonnegative real
//! values, as written by `simulate`).

use std::path::Path;

use chrono::NaiveDate;
use seiar_core::calibration::ObservedSeries;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct CaseSeries {
    /// One date per entry for dated files.
    pub dates: Option<Vec<NaiveDate>>,
    pub counts: Vec<f64>,
}

enum Layout {
    Dated,
    Indexed,
}

pub fn parse_case_series(text: &str, source_name: &str) -> Result<CaseSeries, CliError> {
    let err = |line: u64, msg: String| CliError::DataLine { source_name: source_name.to_string(), line, msg };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
    let layout = match headers.iter().collect::<Vec<_>>().as_slice() {
        ["date", "new_confirmed"] => Layout::Dated,
        ["day", "new_confirmed"] => Layout::Indexed,
        other => {
            return Err(err(
                1,
                format!("header must be `date,new_confirmed` or `day,new_confirmed`, got `{}`", other.join(",")),
            ))
        }
    };

    let mut dates = Vec::new();
    let mut counts = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let (key, value) = (&rec[0], &rec[1]);
        match layout {
            Layout::Dated => {
                let date = NaiveDate::parse_from_str(key, "%Y-%m-%d")
                    .map_err(|_| err(line, format!("`{key}` is not a valid YYYY-MM-DD date")))?;
                if let Some(prev) = dates.last() {
                    if date <= *prev {
                        return Err(err(line, format!("date {date} does not increase (previous {prev})")));
                    }
                    if prev.succ_opt() != Some(date) {
                        return Err(err(line, format!("gap: {date} follows {prev}; data must be daily")));
                    }
                }
                let n: u64 = value
                    .parse()
                    .map_err(|_| err(line, format!("new_confirmed `{value}` is not a nonnegative integer")))?;
                dates.push(date);
                counts.push(n as f64);
            }
            Layout::Indexed => {
                let day: usize =
                    key.parse().map_err(|_| err(line, format!("day `{key}` is not a nonnegative integer")))?;
                if day != counts.len() {
                    return Err(err(line, format!("expected day {}, got {day}", counts.len())));
                }
                let v: f64 =
                    value.parse().map_err(|_| err(line, format!("new_confirmed `{value}` is not a number")))?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(err(line, format!("new_confirmed {value} must be finite and nonnegative")));
                }
                counts.push(v);
            }
        }
    }
    if counts.is_empty() {
        return Err(CliError::Data(format!("{source_name}: no data rows")));
    }
    let dates = matches!(layout, Layout::Dated).then_some(dates);
    Ok(CaseSeries { dates, counts })
}

pub fn read_case_series(path: &Path) -> Result<CaseSeries, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_case_series(&text, &path.display().to_string())
}

impl CaseSeries {
    /// Restrict to `[start, end]`; both ends must be covered by the data.
    pub fn window(&self, start: Option<NaiveDate>, end: Option<NaiveDate>) -> Result<CaseSeries, CliError> {
        if start.is_none() && end.is_none() {
            return Ok(self.clone());
        }
        let dates = self
            .dates
            .as_ref()
            .ok_or_else(|| CliError::Config("a date window needs a dated (`date,new_confirmed`) data file".into()))?;
        let first = dates[0];
        let last = *dates.last().expect("nonempty");
        let start = start.unwrap_or(first);
        let end = end.unwrap_or(last);
        if start < first || end > last {
            return Err(CliError::Data(format!("window {start}..{end} is not covered by data {first}..{last}")));
        }
        let lo = (start - first).num_days() as usize;
        let hi = (end - first).num_days() as usize + 1;
        Ok(CaseSeries { dates: Some(dates[lo..hi].to_vec()), counts: self.counts[lo..hi].to_vec() })
    }

    pub fn observed(&self) -> Result<ObservedSeries, CliError> {
        Ok(ObservedSeries::new(self.dates.as_ref().map(|d| d[0]), self.counts.clone())?)
    }
}
