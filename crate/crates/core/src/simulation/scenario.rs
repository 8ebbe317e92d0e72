use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{CensoringModel, ExponentialSurvival, WeightSetting};
use crate::error::{Error, Result};

/// Time at which `s1_at_3` is specified.
pub const SURVIVAL_LANDMARK: f64 = 3.0;

const TABLE1_JSON: &str = include_str!("../../data/table1.json");

/// One simulation setting: exponential survival, uniform recruitment,
/// administrative censoring at `t_h` (and `t_h_plus` for the extended follow-up).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: u32,
    #[serde(default)]
    pub event_rate: String,
    #[serde(default)]
    pub recruitment: String,
    /// Experimental-arm survival probability at 3 years.
    pub s1_at_3: f64,
    pub hr: f64,
    pub n_per_arm: usize,
    pub tau: f64,
    pub t_h: f64,
    pub t_h_plus: f64,
    pub t_r: f64,
    #[serde(default = "default_reps")]
    pub n_reps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Analyse the `t_h` log-rank test truncated at the per-replicate effective tau.
    #[serde(default)]
    pub logrank_at_effective_tau: bool,
}

fn default_reps() -> usize {
    10_000
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(format!("scenario {}: {msg}", self.id)));
        if !(self.s1_at_3 > 0.0 && self.s1_at_3 < 1.0) {
            return bad(format!("s1_at_3 must lie in (0, 1), got {}", self.s1_at_3));
        }
        if !(self.hr.is_finite() && self.hr > 0.0) {
            return bad(format!("hr must be positive, got {}", self.hr));
        }
        if self.n_per_arm == 0 {
            return bad("n_per_arm must be positive".into());
        }
        if !(self.tau > 0.0 && self.tau <= self.t_h && self.t_h <= self.t_h_plus && self.t_h_plus.is_finite()) {
            return bad(format!(
                "need 0 < tau <= t_h <= t_h_plus, got {}, {}, {}",
                self.tau, self.t_h, self.t_h_plus
            ));
        }
        if !(self.t_r >= 0.0 && self.t_r <= self.t_h) {
            return bad(format!("need 0 <= t_r <= t_h, got t_r = {}", self.t_r));
        }
        if self.n_reps == 0 {
            return bad("n_reps must be >= 1".into());
        }
        Ok(())
    }

    /// Exponential hazards `(control, experimental)`.
    pub fn hazard_rates(&self) -> (f64, f64) {
        let lambda1 = -self.s1_at_3.ln() / SURVIVAL_LANDMARK;
        (lambda1 / self.hr, lambda1)
    }

    pub fn censoring(&self) -> Result<CensoringModel> {
        CensoringModel::new(self.t_r, self.t_h)
    }

    /// Weight-function inputs: control survival with censoring at `t_h`.
    pub fn weight_setting(&self) -> Result<WeightSetting> {
        Ok(WeightSetting {
            control: ExponentialSurvival::new(self.hazard_rates().0)?,
            censoring: self.censoring()?,
            tau: self.tau,
        })
    }
}

pub fn parse_scenarios(json: &str) -> Result<Vec<Scenario>> {
    let scenarios: Vec<Scenario> = serde_json::from_str(json)?;
    for s in &scenarios {
        s.validate()?;
    }
    Ok(scenarios)
}

pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    parse_scenarios(&std::fs::read_to_string(path)?)
}

/// The twelve bundled scenarios (three event rates by four recruitment speeds).
pub fn table1() -> Vec<Scenario> {
    parse_scenarios(TABLE1_JSON).expect("bundled scenario config is valid")
}

pub fn table1_json() -> &'static str {
    TABLE1_JSON
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bundled_config_matches_design() {
        let all = table1();
        assert_eq!(all.len(), 12);
        for (i, s) in all.iter().enumerate() {
            assert_eq!(s.id as usize, i + 1);
            assert_eq!(s.hr, 0.67);
            assert_eq!((s.tau, s.t_h, s.t_h_plus), (3.0, 3.0, 3.5));
            let (rate, n) = match i / 4 {
                0 => (0.9, 1000),
                1 => (0.6, 250),
                _ => (0.2, 150),
            };
            assert_eq!(s.s1_at_3, rate);
            assert_eq!(s.n_per_arm, n);
            assert_eq!(s.t_r, [0.0, 0.5, 1.5, 2.5][i % 4]);
            assert_eq!(s.n_reps, 10_000);
        }
    }

    #[test]
    fn hazard_rate_examples() {
        let mut s = table1().remove(0);
        let (l0, l1) = s.hazard_rates();
        assert_abs_diff_eq!(l1, 0.035120, epsilon = 5e-7);
        assert_abs_diff_eq!(l0, 0.052418, epsilon = 5e-6);
        assert_abs_diff_eq!((-3.0 * l1).exp(), 0.9, epsilon = 1e-12);
        s.s1_at_3 = 0.2;
        let (l0, l1) = s.hazard_rates();
        assert_abs_diff_eq!(l1, 0.536479, epsilon = 5e-7);
        assert_abs_diff_eq!(l0, 0.800715, epsilon = 5e-6);
        s.hr = 1.0;
        let (l0, l1) = s.hazard_rates();
        assert_eq!(l0, l1);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        assert!(parse_scenarios(r#"[{"id":1,"s1_at_3":0.9,"hr":0.67,"n_per_arm":10,"tau":3,"t_h":3,"t_h_plus":3.5,"t_r":0,"bogus":1}]"#).is_err());
        assert!(parse_scenarios(r#"[{"id":1,"s1_at_3":0.9,"hr":0.67,"n_per_arm":10,"tau":3.2,"t_h":3,"t_h_plus":3.5,"t_r":0}]"#).is_err());
        let ok = parse_scenarios(r#"[{"id":7,"s1_at_3":0.9,"hr":0.67,"n_per_arm":10,"tau":3,"t_h":3,"t_h_plus":3.5,"t_r":0}]"#).unwrap();
        assert_eq!(ok[0].n_reps, 10_000);
        assert!(!ok[0].logrank_at_effective_tau);
    }
}
