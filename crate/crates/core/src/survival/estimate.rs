use crate::error::{Error, Result};

use super::step::StepFunction;

/// Risk-set summary at one distinct event time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventTime {
    pub time: f64,
    /// Subjects with follow-up `>= time`.
    pub at_risk: usize,
    pub events: usize,
}

fn validate(data: &[(f64, bool)]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyArm);
    }
    if let Some((t, _)) = data.iter().find(|(t, _)| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidInput(format!(
            "follow-up time must be finite and >= 0, got {t}"
        )));
    }
    Ok(())
}

/// Distinct event times with their risk sets, ascending.
///
/// Records tied at a time are aggregated; events at a time are counted
/// against the risk set before censorings at that time leave it.
pub fn event_table(data: &[(f64, bool)]) -> Result<Vec<EventTime>> {
    validate(data)?;
    let mut sorted: Vec<(f64, bool)> = data.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut table = Vec::new();
    let mut remaining = sorted.len();
    let mut i = 0;
    while i < sorted.len() {
        let time = sorted[i].0;
        let mut j = i;
        let mut events = 0;
        while j < sorted.len() && sorted[j].0 == time {
            events += usize::from(sorted[j].1);
            j += 1;
        }
        if events > 0 {
            table.push(EventTime {
                time,
                at_risk: remaining,
                events,
            });
        }
        remaining -= j - i;
        i = j;
    }
    Ok(table)
}

/// Kaplan-Meier product-limit survival estimate.
pub fn km_estimate(data: &[(f64, bool)]) -> Result<StepFunction> {
    Ok(km_from_table(&event_table(data)?))
}

/// Nelson-Aalen cumulative hazard estimate.
pub fn na_estimate(data: &[(f64, bool)]) -> Result<StepFunction> {
    Ok(na_from_table(&event_table(data)?))
}

pub(crate) fn km_from_table(table: &[EventTime]) -> StepFunction {
    let mut surv = 1.0;
    let (bps, vals) = table
        .iter()
        .map(|e| {
            surv *= 1.0 - e.events as f64 / e.at_risk as f64;
            (e.time, surv)
        })
        .unzip();
    StepFunction::new(bps, vals, 1.0).expect("event times are strictly increasing")
}

fn na_from_table(table: &[EventTime]) -> StepFunction {
    let mut cum = 0.0;
    let (bps, vals) = table
        .iter()
        .map(|e| {
            cum += e.events as f64 / e.at_risk as f64;
            (e.time, cum)
        })
        .unzip();
    StepFunction::new(bps, vals, 0.0).expect("event times are strictly increasing")
}
