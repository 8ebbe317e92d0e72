use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use rmst_power::asymptotics::standardized_curves;
use rmst_power::ingest::{
    analyze_case, load_csv, write_case_csv, write_score_summary_csv, write_scores_csv,
    write_weights_csv, CaseStudyConfig, RECONSTRUCTION_TOLERANCE,
};
use rmst_power::scores::{patient_scores, score_summary};
use rmst_power::simulation::{load_scenarios, run_scenario, table1, table1_json, write_results_csv, Scenario};
use rmst_power::Arm;

#[derive(Parser)]
#[command(name = "rmst-power", version, about = "RMST-difference vs log-rank power and case-study analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo power of both tests for each configured scenario.
    Simulate {
        /// Scenario config (JSON array); defaults to the bundled twelve scenarios.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Run only this scenario id.
        #[arg(long)]
        scenario: Option<u32>,
        /// Override the number of replicates.
        #[arg(long)]
        reps: Option<usize>,
        /// Override the base seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Raw and standardized weight functions of both statistics.
    Weights {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<u32>,
        #[arg(long, default_value_t = 301)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cox, log-rank and RMST tests on a patient-level `time,event,arm` file.
    Analyze {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        tau: f64,
        /// Label carried into the output; no conversion is done.
        #[arg(long, default_value = "")]
        time_unit: String,
        /// Expected Cox Z (positive = benefit on arm 1); requires --expect-rmst.
        #[arg(long, requires = "expect_rmst", allow_negative_numbers = true)]
        expect_cox: Option<f64>,
        #[arg(long, requires = "expect_cox", allow_negative_numbers = true)]
        expect_rmst: Option<f64>,
        #[arg(long, default_value_t = RECONSTRUCTION_TOLERANCE)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-patient log-rank and RMST scores plus per-arm means.
    Scores {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        out: PathBuf,
        /// Per-arm means; defaults to `<out stem>_summary.csv`.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Print the bundled scenario config.
    DefaultConfig,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn scenarios(config: Option<&Path>, only: Option<u32>) -> Result<Vec<Scenario>> {
    let all = match config {
        Some(p) => load_scenarios(p).with_context(|| format!("reading {}", p.display()))?,
        None => table1(),
    };
    let selected: Vec<_> = all.into_iter().filter(|s| only.is_none_or(|id| s.id == id)).collect();
    if selected.is_empty() {
        bail!("no scenario matches the selection");
    }
    Ok(selected)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate {
            config,
            scenario,
            reps,
            seed,
            out,
        } => {
            let mut rows = Vec::new();
            for s in scenarios(config.as_deref(), scenario)? {
                let n_reps = reps.unwrap_or(s.n_reps);
                let seed = seed.unwrap_or(s.seed);
                let start = Instant::now();
                let result = run_scenario(&s, n_reps, seed)?;
                eprintln!(
                    "scenario {:>2}: RMST {:.3} PH {:.3} RMST+ {:.3} PH+ {:.3} ({} reps, {} failed, {:.1}s)",
                    s.id,
                    result.power_rmst,
                    result.power_ph,
                    result.power_rmst_plus,
                    result.power_ph_plus,
                    n_reps,
                    result.n_failed,
                    start.elapsed().as_secs_f64()
                );
                rows.push((s, result));
            }
            write_results_csv(output(out.as_deref())?, &rows)?;
        }
        Command::Weights {
            config,
            scenario,
            grid,
            out,
        } => {
            let mut curves = Vec::new();
            for s in scenarios(config.as_deref(), scenario)? {
                let (w_d, w_theta) = standardized_curves(&s.weight_setting()?, grid)?;
                curves.push((s.id, w_d, w_theta));
            }
            write_weights_csv(&curves, output(out.as_deref())?)?;
        }
        Command::Analyze {
            data,
            tau,
            time_unit,
            expect_cox,
            expect_rmst,
            tolerance,
            out,
        } => {
            let config = CaseStudyConfig {
                path: data,
                tau,
                time_unit,
                expected_z: expect_cox.zip(expect_rmst),
                tolerance,
            };
            let report = analyze_case(&config)?;
            eprintln!(
                "{}: {} control, {} experimental, {} events",
                config.path.display(),
                report.n_control,
                report.n_experimental,
                report.events
            );
            write_case_csv(std::slice::from_ref(&report), output(out.as_deref())?)?;
            if let Some(expected) = config.expected_z {
                let problems = report.check(expected, config.tolerance);
                if !problems.is_empty() {
                    bail!("regression check failed: {}", problems.join("; "));
                }
                eprintln!("matches expected Z within {}", config.tolerance);
            }
        }
        Command::Scores {
            data,
            tau,
            out,
            summary,
        } => {
            let dataset = load_csv(&data).with_context(|| format!("reading {}", data.display()))?;
            eprintln!(
                "{}: {} control, {} experimental",
                data.display(),
                dataset.arm_size(Arm::Control),
                dataset.arm_size(Arm::Experimental)
            );
            let records = patient_scores(&dataset, tau)?;
            write_scores_csv(&records, output(Some(&out))?)?;
            let summary_path = summary.unwrap_or_else(|| {
                let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("scores");
                out.with_file_name(format!("{stem}_summary.csv"))
            });
            write_score_summary_csv(&score_summary(&records)?, output(Some(&summary_path))?)?;
        }
        Command::DefaultConfig => {
            io::stdout().write_all(table1_json().as_bytes())?;
        }
    }
    Ok(())
}
