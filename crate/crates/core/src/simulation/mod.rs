//! Monte Carlo power study: trial generation under exponential survival with
//! uniform recruitment, both tests per replicate, and aggregation.

mod runner;
mod scenario;
mod trial;

pub use runner::{
    event_probability, expected_events, mc_se, relative_efficiency, run_replicate, run_scenario,
    schoenfeld_power, write_results_csv, ReplicateOutcome, ScenarioResult, MAX_FAILURE_FRACTION,
    RESULTS_HEADER,
};
pub use scenario::{load_scenarios, parse_scenarios, table1, table1_json, Scenario, SURVIVAL_LANDMARK};
pub use trial::{effective_tau, simulate_trial, LatentCohort, LatentSubject, RandomSource};
