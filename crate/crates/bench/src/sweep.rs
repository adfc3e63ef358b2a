//! The `sweep` subcommand: one experiment per value of a single parameter.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ojak::oja::{phase1_length_real, ConstantProfile};
use serde::Serialize;
use serde_json::Value;

use crate::config::{ExperimentConfig, ResolvedExperiment};
use crate::runner::run_trials;
use crate::summary::{fit_loglog_slope, ExperimentSummary, Quantiles};
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepAxis {
    #[serde(rename = "T")]
    Horizon,
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "d")]
    Dim,
    #[serde(rename = "k")]
    K,
    #[serde(rename = "noise_scale")]
    NoiseScale,
    #[serde(rename = "beta")]
    Beta,
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "T" => Self::Horizon,
            "delta" => Self::Delta,
            "d" => Self::Dim,
            "k" => Self::K,
            "noise_scale" => Self::NoiseScale,
            "beta" => Self::Beta,
            _ => {
                return Err(format!(
                    "unknown axis {s:?}; expected T, delta, d, k, noise_scale or beta"
                ))
            }
        })
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Horizon => "T",
            Self::Delta => "delta",
            Self::Dim => "d",
            Self::K => "k",
            Self::NoiseScale => "noise_scale",
            Self::Beta => "beta",
        })
    }
}

fn as_count(axis: SweepAxis, value: f64) -> Result<usize, BenchError> {
    if value >= 1.0 && value.fract() == 0.0 && value < u32::MAX as f64 {
        Ok(value as usize)
    } else {
        Err(BenchError::Config(format!(
            "{axis} = {value} must be a positive integer"
        )))
    }
}

/// `config` with `axis` set to `value`.
pub fn apply_axis(mut config: ExperimentConfig, axis: SweepAxis, value: f64) -> Result<ExperimentConfig, BenchError> {
    let stream = |e: ojak::streams::StreamError| BenchError::Config(format!("{axis}: {e}"));
    match axis {
        SweepAxis::Horizon => config.horizon = as_count(axis, value)?,
        SweepAxis::Delta => config.delta = value,
        SweepAxis::Dim => config.distribution.set_dim(as_count(axis, value)?).map_err(stream)?,
        SweepAxis::K => config.distribution.set_k(as_count(axis, value)?),
        SweepAxis::NoiseScale => config.distribution.set_noise_scale(value).map_err(stream)?,
        SweepAxis::Beta => config.schedule.beta = Some(value),
    }
    Ok(config)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub phase1_length: usize,
    /// Unrounded Phase I length from the configured profile.
    pub phase1_length_real: f64,
    pub beta: f64,
    pub final_subspace_dist: Quantiles,
    pub final_w_norm: Quantiles,
    pub survival_fraction: f64,
    pub decay_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    /// Axis `T` only: slope of log median final distance against
    /// `log(T − T0)`.
    pub slope: Option<f64>,
    pub config: Value,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,phase1_length,beta,dist_q10,dist_median,dist_q90,w_median,survival\n");
        for r in &self.rows {
            let q = &r.final_subspace_dist;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.value, r.phase1_length, r.beta, q.q10, q.median, q.q90, r.final_w_norm.median, r.survival_fraction
            ));
        }
        out
    }
}

/// Resolve every point first so a bad value fails before any run starts.
pub fn resolve_sweep(
    config: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<(f64, ResolvedExperiment)>, BenchError> {
    if values.is_empty() {
        return Err(BenchError::Config("sweep needs at least one value".into()));
    }
    values
        .iter()
        .map(|&v| Ok((v, ResolvedExperiment::new(apply_axis(config.clone(), axis, v)?)?)))
        .collect()
}

pub fn run_sweep(
    config: &ExperimentConfig,
    axis: SweepAxis,
    points: &[(f64, ResolvedExperiment)],
) -> Result<SweepReport, BenchError> {
    let mut rows = Vec::with_capacity(points.len());
    for (value, exp) in points {
        let start = Instant::now();
        let outcomes = run_trials(exp)?;
        let summary = ExperimentSummary::build(exp, &outcomes, start.elapsed().as_secs_f64());
        let profile = ConstantProfile::of_kind(exp.config.schedule.profile);
        rows.push(SweepRow {
            value: *value,
            phase1_length: exp.schedule.phase1_length,
            phase1_length_real: phase1_length_real(exp.dist.model(), exp.dist.dim(), exp.config.delta, &profile),
            beta: exp.schedule.beta,
            final_subspace_dist: summary.final_subspace_dist,
            final_w_norm: summary.final_w_norm,
            survival_fraction: summary.survival_fraction,
            decay_slope: summary.decay_slope,
        });
    }
    let slope = (axis == SweepAxis::Horizon).then(|| {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .zip(points)
            .filter(|(_, (_, exp))| exp.config.horizon > exp.schedule.phase1_length)
            .map(|(r, (_, exp))| {
                (
                    (exp.config.horizon - exp.schedule.phase1_length) as f64,
                    r.final_subspace_dist.median,
                )
            })
            .collect();
        fit_loglog_slope(&pts)
    });
    Ok(SweepReport {
        axis,
        rows,
        slope: slope.flatten(),
        config: serde_json::to_value(config).expect("config serializes"),
    })
}
