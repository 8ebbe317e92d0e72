//! Right-censored two-arm data and the Kaplan-Meier / Nelson-Aalen estimators.

mod data;
mod estimate;
mod step;

pub use data::{Arm, SubjectRecord, TrialDataset};
pub use estimate::{event_table, km_estimate, na_estimate, EventTime};
pub use step::{restricted_integral, StepFunction};

pub(crate) use estimate::km_from_table;
