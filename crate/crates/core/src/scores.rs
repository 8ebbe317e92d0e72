//! Per-patient scores whose arm-wise means reproduce the log-rank numerator and
//! an RMST-weighted analogue of it.
//!
//! With pooled Nelson-Aalen increments `dL` and a weight `w` on `[0, tau]`, a
//! patient followed to `t` with event indicator `d` scores
//! `d * w(min(t, tau)) - sum_{u <= min(t, tau)} w(u) dL(u)`. The log-rank score
//! uses `w = 1` without the `tau` cap; the RMST score uses the pooled
//! Kaplan-Meier version of `w_D`, which vanishes at `tau`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::survival::{event_table, km_from_table, restricted_integral, Arm, TrialDataset};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScoreRecord {
    pub time: f64,
    pub event: bool,
    pub arm: Arm,
    /// Standardized to mean 0, variance 1 over the pooled sample.
    pub score_logrank: f64,
    pub score_rmst: f64,
    #[serde(skip)]
    pub raw_logrank: f64,
    #[serde(skip)]
    pub raw_rmst: f64,
}

pub fn patient_scores(dataset: &TrialDataset, tau: f64) -> Result<Vec<ScoreRecord>> {
    let pooled: Vec<(f64, bool)> = dataset.subjects().iter().map(|s| (s.time, s.event)).collect();
    let table = event_table(&pooled)?;
    if table.is_empty() {
        return Err(Error::NoEvents);
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidInput(format!("tau must be positive, got {tau}")));
    }
    let max_time = pooled.iter().map(|p| p.0).fold(0.0, f64::max);
    if tau > max_time {
        return Err(Error::TauBeyondData { tau, max_time });
    }

    let km = km_from_table(&table);
    let total_area = restricted_integral(&km, 0.0, tau)?;
    if total_area <= 0.0 {
        return Err(Error::InvalidInput("pooled survival has zero area on [0, tau]".into()));
    }
    let w_d = |u: f64| -> Result<f64> { Ok(restricted_integral(&km, u, tau)? / total_area) };

    // running sums over pooled event times: plain and w_D-weighted hazard increments
    let times: Vec<f64> = table.iter().map(|e| e.time).collect();
    let mut hazard = Vec::with_capacity(table.len());
    let mut weighted = Vec::with_capacity(table.len());
    let mut weight_at = Vec::with_capacity(table.len());
    let (mut h, mut wh) = (0.0, 0.0);
    for e in &table {
        let inc = e.events as f64 / e.at_risk as f64;
        h += inc;
        let w = if e.time <= tau { w_d(e.time)? } else { 0.0 };
        if e.time <= tau {
            wh += w * inc;
        }
        hazard.push(h);
        weighted.push(wh);
        weight_at.push(w);
    }
    let upto = |t: f64| times.partition_point(|&u| u <= t);

    let mut records: Vec<ScoreRecord> = dataset
        .subjects()
        .iter()
        .map(|s| {
            let k = upto(s.time);
            let cum_hazard = if k == 0 { 0.0 } else { hazard[k - 1] };
            let raw_logrank = f64::from(u8::from(s.event)) - cum_hazard;

            let capped = s.time.min(tau);
            let kc = upto(capped);
            let cum_weighted = if kc == 0 { 0.0 } else { weighted[kc - 1] };
            // an event at or before tau sits exactly on a pooled event time
            let own = if s.event && s.time <= tau { weight_at[k - 1] } else { 0.0 };
            ScoreRecord {
                time: s.time,
                event: s.event,
                arm: s.arm,
                score_logrank: 0.0,
                score_rmst: 0.0,
                raw_logrank,
                raw_rmst: own - cum_weighted,
            }
        })
        .collect();

    let lr = standardize(&records.iter().map(|r| r.raw_logrank).collect::<Vec<_>>())?;
    let rm = standardize(&records.iter().map(|r| r.raw_rmst).collect::<Vec<_>>())?;
    for ((r, a), b) in records.iter_mut().zip(lr).zip(rm) {
        r.score_logrank = a;
        r.score_rmst = b;
    }
    Ok(records)
}

fn standardize(raw: &[f64]) -> Result<Vec<f64>> {
    let n = raw.len() as f64;
    let mean = raw.iter().sum::<f64>() / n;
    let var = raw.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if var <= 0.0 {
        return Err(Error::InvalidInput("scores have zero variance".into()));
    }
    let sd = var.sqrt();
    Ok(raw.iter().map(|x| (x - mean) / sd).collect())
}

/// Arm means of one score kind; `diff = mean_arm0 - mean_arm1`, positive when
/// the experimental arm has the lower (better) scores.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArmMeans {
    pub mean_arm0: f64,
    pub mean_arm1: f64,
    pub diff: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScoreSummary {
    pub logrank: ArmMeans,
    pub rmst: ArmMeans,
}

pub fn score_summary(records: &[ScoreRecord]) -> Result<ScoreSummary> {
    let means = |f: fn(&ScoreRecord) -> f64| -> Result<ArmMeans> {
        let mut sums = [0.0; 2];
        let mut counts = [0usize; 2];
        for r in records {
            let i = usize::from(r.arm.code());
            sums[i] += f(r);
            counts[i] += 1;
        }
        if counts.contains(&0) {
            return Err(Error::EmptyArm);
        }
        let mean_arm0 = sums[0] / counts[0] as f64;
        let mean_arm1 = sums[1] / counts[1] as f64;
        Ok(ArmMeans {
            mean_arm0,
            mean_arm1,
            diff: mean_arm0 - mean_arm1,
        })
    };
    Ok(ScoreSummary {
        logrank: means(|r| r.score_logrank)?,
        rmst: means(|r| r.score_rmst)?,
    })
}
