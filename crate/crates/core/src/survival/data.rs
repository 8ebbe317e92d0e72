use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Treatment arm of a two-arm trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arm {
    Control,
    Experimental,
}

impl Arm {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Arm::Control),
            1 => Some(Arm::Experimental),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Arm::Control => 0,
            Arm::Experimental => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Arm::Control => Arm::Experimental,
            Arm::Experimental => Arm::Control,
        }
    }
}

/// One patient: arm, follow-up time on study, and whether the event was observed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub arm: Arm,
    pub time: f64,
    pub event: bool,
}

impl SubjectRecord {
    pub fn new(arm: Arm, time: f64, event: bool) -> Result<Self> {
        if !time.is_finite() || time < 0.0 {
            return Err(Error::InvalidInput(format!(
                "follow-up time must be finite and >= 0, got {time}"
            )));
        }
        Ok(Self { arm, time, event })
    }
}

/// Right-censored two-arm data analysed at an administrative cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialDataset {
    subjects: Vec<SubjectRecord>,
    cutoff: f64,
}

impl TrialDataset {
    /// Validates every record and that no follow-up exceeds `cutoff`.
    pub fn new(subjects: Vec<SubjectRecord>, cutoff: f64) -> Result<Self> {
        if !cutoff.is_finite() || cutoff <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "cutoff must be positive and finite, got {cutoff}"
            )));
        }
        for (i, s) in subjects.iter().enumerate() {
            if !s.time.is_finite() || s.time < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "subject {i}: follow-up time must be finite and >= 0, got {}",
                    s.time
                )));
            }
            if s.time > cutoff {
                return Err(Error::InvalidInput(format!(
                    "subject {i}: follow-up time {} exceeds cutoff {cutoff}",
                    s.time
                )));
            }
        }
        Ok(Self { subjects, cutoff })
    }

    /// Uses the largest follow-up time as the cutoff.
    pub fn from_records(subjects: Vec<SubjectRecord>) -> Result<Self> {
        let cutoff = subjects.iter().map(|s| s.time).fold(0.0, f64::max);
        if cutoff <= 0.0 {
            return Err(Error::InvalidInput(
                "dataset needs at least one positive follow-up time".into(),
            ));
        }
        Self::new(subjects, cutoff)
    }

    pub(crate) fn from_parts_unchecked(subjects: Vec<SubjectRecord>, cutoff: f64) -> Self {
        debug_assert!(subjects.iter().all(|s| s.time <= cutoff && s.time >= 0.0));
        Self { subjects, cutoff }
    }

    pub fn subjects(&self) -> &[SubjectRecord] {
        &self.subjects
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    /// `(time, event)` pairs for one arm, in input order.
    pub fn arm_data(&self, arm: Arm) -> Vec<(f64, bool)> {
        self.subjects
            .iter()
            .filter(|s| s.arm == arm)
            .map(|s| (s.time, s.event))
            .collect()
    }

    pub fn arm_size(&self, arm: Arm) -> usize {
        self.subjects.iter().filter(|s| s.arm == arm).count()
    }

    pub fn event_count(&self) -> usize {
        self.subjects.iter().filter(|s| s.event).count()
    }

    pub fn max_time(&self, arm: Arm) -> Option<f64> {
        self.subjects
            .iter()
            .filter(|s| s.arm == arm)
            .map(|s| s.time)
            .reduce(f64::max)
    }

    /// Errors unless both arms have at least one subject.
    pub fn require_two_arms(&self) -> Result<()> {
        if self.arm_size(Arm::Control) == 0 || self.arm_size(Arm::Experimental) == 0 {
            return Err(Error::EmptyArm);
        }
        Ok(())
    }

    /// Same data with arm labels exchanged.
    pub fn swap_arms(&self) -> Self {
        let subjects = self
            .subjects
            .iter()
            .map(|s| SubjectRecord {
                arm: s.arm.other(),
                ..*s
            })
            .collect();
        Self {
            subjects,
            cutoff: self.cutoff,
        }
    }

    /// Administratively censors every record at `time` (never extends follow-up).
    pub fn truncate_at(&self, time: f64) -> Self {
        let cutoff = self.cutoff.min(time);
        let subjects = self
            .subjects
            .iter()
            .map(|s| {
                if s.time > cutoff {
                    SubjectRecord {
                        arm: s.arm,
                        time: cutoff,
                        event: false,
                    }
                } else {
                    *s
                }
            })
            .collect();
        Self { subjects, cutoff }
    }
}
