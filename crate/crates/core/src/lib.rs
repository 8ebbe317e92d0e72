//! Two-arm survival analysis comparing a nonparametric restricted-mean
//! (RMST) difference test with the log-rank / Cox proportional-hazards test.
//!
//! - [`survival`]: data model, Kaplan-Meier and Nelson-Aalen estimators.
//! - [`rmst`]: restricted mean with plug-in variance and the difference test.
//! - [`ph`]: log-rank test and treatment-only Cox model.
//! - [`asymptotics`]: closed-form weight functions of both statistics.
//! - [`simulation`]: Monte Carlo power study with uniform recruitment.
//! - [`scores`]: per-patient score decomposition of both statistics.
//! - [`ingest`]: patient-level CSV and case-study analysis.

pub mod asymptotics;
pub mod error;
pub mod ingest;
pub mod normal;
pub mod ph;
pub mod rmst;
pub mod scores;
pub mod simulation;
pub mod survival;

pub use error::{Error, Result};
pub use rmst::TestResult;
pub use survival::{Arm, StepFunction, SubjectRecord, TrialDataset};
