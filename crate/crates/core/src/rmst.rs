//! Restricted mean survival time: Kaplan-Meier area with its plug-in variance,
//! and the two-sample difference test.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::normal;
use crate::survival::{event_table, km_from_table, restricted_integral, Arm, TrialDataset};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RmstEstimate {
    pub mu: f64,
    pub variance: f64,
    pub tau: f64,
}

/// Standardized two-sample statistic shared by the RMST and log-rank tests.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TestResult {
    pub z: f64,
    pub p_two_sided: f64,
    /// Difference in RMST, or the log-rank numerator `O1 - E1`.
    pub estimate: f64,
    pub std_err: f64,
}

impl TestResult {
    pub fn from_estimate(estimate: f64, std_err: f64) -> Self {
        let z = estimate / std_err;
        Self {
            z,
            p_two_sided: normal::two_sided_p(z),
            estimate,
            std_err,
        }
    }

    /// Two-sided rejection at the 5% level.
    pub fn rejects(&self) -> bool {
        self.z.abs() > normal::z_975()
    }
}

/// Restricted mean `integral_0^tau S(t) dt` with variance
/// `sum_{t_i <= tau} A(t_i)^2 d_i / (n_i (n_i - d_i))`, `A(t) = integral_t^tau S`.
pub fn rmst_estimate(data: &[(f64, bool)], tau: f64) -> Result<RmstEstimate> {
    let table = event_table(data)?;
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::InvalidInput(format!("tau must be positive, got {tau}")));
    }
    let max_time = data.iter().map(|d| d.0).fold(0.0, f64::max);
    if tau > max_time {
        return Err(Error::TauBeyondData { tau, max_time });
    }
    let km = km_from_table(&table);
    let mu = restricted_integral(&km, 0.0, tau)?.clamp(0.0, tau);

    let within: Vec<_> = table.iter().take_while(|e| e.time <= tau).collect();
    let surv = &km.values()[..within.len()];
    // area from each event time to tau, accumulated right to left
    let mut tail = vec![0.0; within.len()];
    let mut acc = 0.0;
    for i in (0..within.len()).rev() {
        let next = within.get(i + 1).map_or(tau, |e| e.time);
        acc += surv[i] * (next - within[i].time);
        tail[i] = acc;
    }

    let mut variance = 0.0;
    for (e, &area) in within.iter().zip(&tail) {
        let n = e.at_risk as f64;
        let d = e.events as f64;
        if e.at_risk == e.events {
            if area > 0.0 {
                return Err(Error::ExhaustedRiskSet { time: e.time });
            }
            continue;
        }
        variance += area * area * d / (n * (n - d));
    }
    Ok(RmstEstimate { mu, variance, tau })
}

/// Difference in RMST (experimental minus control) with a normal reference.
pub fn rmst_diff_test(dataset: &TrialDataset, tau: f64) -> Result<TestResult> {
    dataset.require_two_arms()?;
    let control = rmst_estimate(&dataset.arm_data(Arm::Control), tau)?;
    let experimental = rmst_estimate(&dataset.arm_data(Arm::Experimental), tau)?;
    let std_err = (experimental.variance + control.variance).sqrt();
    if std_err <= 0.0 || !std_err.is_finite() {
        return Err(Error::DegenerateVariance);
    }
    Ok(TestResult::from_estimate(experimental.mu - control.mu, std_err))
}
