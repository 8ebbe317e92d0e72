//! Patient-level CSV interchange (`time,event,arm`), case-study analysis, and
//! the CSV layouts emitted by the command-line tool.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::asymptotics::WeightCurve;
use crate::error::{Error, Result};
use crate::ph::{cox_fit, logrank_test};
use crate::rmst::rmst_diff_test;
use crate::scores::{ScoreRecord, ScoreSummary};
use crate::survival::{Arm, SubjectRecord, TrialDataset};

pub const PATIENT_COLUMNS: [&str; 3] = ["time", "event", "arm"];

/// Reads a patient-level file; the cutoff is the largest follow-up time.
pub fn load_csv(path: &Path) -> Result<TrialDataset> {
    let file = std::fs::File::open(path)?;
    read_csv(file, path)
}

/// Like [`load_csv`] from any reader; `source` only labels errors.
pub fn read_csv<R: Read>(reader: R, source: &Path) -> Result<TrialDataset> {
    let fail = |line: u64, message: String| Error::Parse {
        path: source.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers().map_err(|e| fail(1, e.to_string()))?.clone();
    let mut index = [usize::MAX; 3];
    for (i, name) in headers.iter().enumerate() {
        match PATIENT_COLUMNS.iter().position(|c| *c == name) {
            Some(k) if index[k] == usize::MAX => index[k] = i,
            Some(_) => return Err(fail(1, format!("duplicate column `{name}`"))),
            None => return Err(fail(1, format!("unknown column `{name}`"))),
        }
    }
    if let Some(k) = index.iter().position(|&i| i == usize::MAX) {
        return Err(fail(1, format!("missing column `{}`", PATIENT_COLUMNS[k])));
    }

    let mut subjects = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            fail(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |k: usize| row.get(index[k]).unwrap_or("");
        let time: f64 = field(0)
            .parse()
            .map_err(|_| fail(line, format!("time `{}` is not a number", field(0))))?;
        if !time.is_finite() || time < 0.0 {
            return Err(fail(line, format!("time must be finite and >= 0, got {}", field(0))));
        }
        let event = match field(1) {
            "0" => false,
            "1" => true,
            other => return Err(fail(line, format!("event must be 0 or 1, got `{other}`"))),
        };
        let arm = match field(2) {
            "0" => Arm::Control,
            "1" => Arm::Experimental,
            other => return Err(fail(line, format!("arm must be 0 or 1, got `{other}`"))),
        };
        subjects.push(SubjectRecord { arm, time, event });
    }
    let dataset = TrialDataset::from_records(subjects)?;
    dataset.require_two_arms()?;
    Ok(dataset)
}

/// Canonical `time,event,arm` output; reading it back reproduces the dataset.
pub fn write_csv<W: Write>(dataset: &TrialDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PATIENT_COLUMNS)?;
    for s in dataset.subjects() {
        w.write_record([
            s.time.to_string(),
            u8::from(s.event).to_string(),
            s.arm.code().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Inputs for one case-study analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseStudyConfig {
    pub path: PathBuf,
    pub tau: f64,
    pub time_unit: String,
    /// Published `(Cox Z, RMST Z)`, both oriented so positive favours arm 1.
    pub expected_z: Option<(f64, f64)>,
    pub tolerance: f64,
}

/// Default agreement window for reconstructed data.
pub const RECONSTRUCTION_TOLERANCE: f64 = 0.15;

impl CaseStudyConfig {
    pub fn new(path: impl Into<PathBuf>, tau: f64) -> Self {
        Self {
            path: path.into(),
            tau,
            time_unit: String::new(),
            expected_z: None,
            tolerance: RECONSTRUCTION_TOLERANCE,
        }
    }
}

/// One results row: Cox fit, log-rank, RMST difference and late events.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseReport {
    pub n_control: usize,
    pub n_experimental: usize,
    pub events: usize,
    pub tau: f64,
    pub time_unit: String,
    pub cox_theta: f64,
    pub cox_se: f64,
    /// `theta / se`; negative when arm 1 has the lower hazard.
    pub cox_wald_z: f64,
    pub cox_score_z: f64,
    pub logrank_z: f64,
    pub rmst_diff: f64,
    pub rmst_se: f64,
    /// Positive when arm 1 has the longer restricted mean.
    pub rmst_z: f64,
    pub pct_events_after_tau: f64,
}

impl CaseReport {
    /// Wald Z for the Cox model with positive meaning benefit on arm 1.
    pub fn cox_z_benefit(&self) -> f64 {
        -self.cox_wald_z
    }

    /// Mismatches against published `(Cox Z, RMST Z)` beyond `tolerance`.
    pub fn check(&self, expected: (f64, f64), tolerance: f64) -> Vec<String> {
        let mut problems = Vec::new();
        for (name, got, want) in [
            ("Cox Z", self.cox_z_benefit(), expected.0),
            ("RMST Z", self.rmst_z, expected.1),
        ] {
            if (got - want).abs() > tolerance {
                problems.push(format!("{name} = {got:.4}, expected {want} +/- {tolerance}"));
            }
        }
        problems
    }
}

pub fn analyze_dataset(dataset: &TrialDataset, tau: f64, time_unit: &str) -> Result<CaseReport> {
    dataset.require_two_arms()?;
    let cox = cox_fit(dataset)?;
    let logrank = logrank_test(dataset)?;
    let rmst = rmst_diff_test(dataset, tau)?;
    let events = dataset.event_count();
    let late = dataset
        .subjects()
        .iter()
        .filter(|s| s.event && s.time > tau)
        .count();
    Ok(CaseReport {
        n_control: dataset.arm_size(Arm::Control),
        n_experimental: dataset.arm_size(Arm::Experimental),
        events,
        tau,
        time_unit: time_unit.to_string(),
        cox_theta: cox.theta_hat,
        cox_se: cox.std_err,
        cox_wald_z: cox.wald_z(),
        cox_score_z: cox.score_z,
        logrank_z: logrank.z,
        rmst_diff: rmst.estimate,
        rmst_se: rmst.std_err,
        rmst_z: rmst.z,
        pct_events_after_tau: 100.0 * late as f64 / events as f64,
    })
}

pub fn analyze_case(config: &CaseStudyConfig) -> Result<CaseReport> {
    let dataset = load_csv(&config.path)?;
    if !(config.tau > 0.0) {
        return Err(Error::InvalidInput(format!("tau must be positive, got {}", config.tau)));
    }
    analyze_dataset(&dataset, config.tau, &config.time_unit)
}

pub const CASE_HEADER: [&str; 15] = [
    "n_control",
    "n_experimental",
    "events",
    "tau",
    "time_unit",
    "cox_theta",
    "cox_se",
    "cox_wald_z",
    "cox_score_z",
    "cox_z_benefit",
    "logrank_z",
    "rmst_diff",
    "rmst_se",
    "rmst_z",
    "pct_events_after_tau",
];

pub fn write_case_csv<W: Write>(reports: &[CaseReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CASE_HEADER)?;
    for r in reports {
        w.write_record([
            r.n_control.to_string(),
            r.n_experimental.to_string(),
            r.events.to_string(),
            r.tau.to_string(),
            r.time_unit.clone(),
            r.cox_theta.to_string(),
            r.cox_se.to_string(),
            r.cox_wald_z.to_string(),
            r.cox_score_z.to_string(),
            r.cox_z_benefit().to_string(),
            r.logrank_z.to_string(),
            r.rmst_diff.to_string(),
            r.rmst_se.to_string(),
            r.rmst_z.to_string(),
            r.pct_events_after_tau.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scores_csv<W: Write>(records: &[ScoreRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "event", "arm", "score_logrank", "score_rmst"])?;
    for r in records {
        w.write_record([
            r.time.to_string(),
            u8::from(r.event).to_string(),
            r.arm.code().to_string(),
            r.score_logrank.to_string(),
            r.score_rmst.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_score_summary_csv<W: Write>(summary: &ScoreSummary, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["score", "mean_arm0", "mean_arm1", "diff"])?;
    for (name, m) in [("logrank", summary.logrank), ("rmst", summary.rmst)] {
        w.write_record([
            name.to_string(),
            m.mean_arm0.to_string(),
            m.mean_arm1.to_string(),
            m.diff.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format weight curves: one block of rows per scenario.
pub fn write_weights_csv<W: Write>(curves: &[(u32, WeightCurve, WeightCurve)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario", "t", "w_D", "w_theta", "w_D_std", "w_theta_std"])?;
    for (id, w_d, w_theta) in curves {
        for i in 0..w_d.grid.len() {
            w.write_record([
                id.to_string(),
                w_d.grid[i].to_string(),
                w_d.raw[i].to_string(),
                w_theta.raw[i].to_string(),
                w_d.values[i].to_string(),
                w_theta.values[i].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
