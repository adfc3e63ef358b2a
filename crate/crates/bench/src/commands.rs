//! Subcommand bodies. Each resolves the whole configuration before touching
//! the output directory, so a config error leaves no files behind.

use std::path::PathBuf;
use std::time::Instant;

use crate::config::{ExperimentConfig, Overrides, ResolvedExperiment};
use crate::output::{write_text, write_trace, SUMMARY_FILE, SWEEP_CSV_FILE, SWEEP_JSON_FILE, VERIFY_FILE};
use crate::runner::run_trials;
use crate::summary::ExperimentSummary;
use crate::sweep::{resolve_sweep, run_sweep, SweepAxis, SweepReport};
use crate::verify::{run_checkers, VerifyReport};
use crate::BenchError;

#[derive(Debug)]
pub struct RunOutput {
    pub summary: ExperimentSummary,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
}

pub fn cmd_run(config: ExperimentConfig, overrides: &Overrides) -> Result<RunOutput, BenchError> {
    let exp = ResolvedExperiment::new(overrides.apply(config))?;
    let start = Instant::now();
    let outcomes = run_trials(&exp)?;
    let summary = ExperimentSummary::build(&exp, &outcomes, start.elapsed().as_secs_f64());
    let trace_path = write_trace(&exp.out_dir, &outcomes)?;
    let summary_path = write_text(&exp.out_dir, SUMMARY_FILE, &summary.to_json())?;
    Ok(RunOutput {
        summary,
        trace_path,
        summary_path,
    })
}

pub fn cmd_verify(config: ExperimentConfig, overrides: &Overrides) -> Result<VerifyReport, BenchError> {
    let config = overrides.apply(config);
    let out_dir = ResolvedExperiment::out_dir_of(&config);
    let report = run_checkers(config)?;
    write_text(&out_dir, VERIFY_FILE, &report.to_json())?;
    Ok(report)
}

pub fn cmd_sweep(
    config: ExperimentConfig,
    overrides: &Overrides,
    axis: SweepAxis,
    values: &[f64],
) -> Result<SweepReport, BenchError> {
    let config = overrides.apply(config);
    let points = resolve_sweep(&config, axis, values)?;
    let out_dir = points[0].1.out_dir.clone();
    let report = run_sweep(&config, axis, &points)?;
    write_text(&out_dir, SWEEP_JSON_FILE, &report.to_json())?;
    write_text(&out_dir, SWEEP_CSV_FILE, &report.to_csv())?;
    Ok(report)
}
