use std::collections::BTreeMap;

use ojak::analysis::{phase2_highprob_bound, validate_assumptions, ChainStats, DeltaStats};
use ojak::oja::{Phase, StepSchedule};
use ojak::rng::GENERATOR_ID;
use serde::Serialize;
use serde_json::Value;

use crate::config::ResolvedExperiment;
use crate::runner::TrialOutcome;

/// Nearest-rank quantile of a sorted slice (no interpolation, so infinite
/// entries never turn into NaN).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    sorted[((sorted.len() - 1) as f64 * q).round() as usize]
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Least-squares slope of `log y` against `log x` over pairs with both
/// coordinates positive and finite. `None` with fewer than two such pairs.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantiles {
    pub q10: f64,
    pub median: f64,
    pub q90: f64,
}

impl Quantiles {
    pub fn of(values: Vec<f64>) -> Self {
        let s = sorted(values);
        Self {
            q10: quantile(&s, 0.1),
            median: quantile(&s, 0.5),
            q90: quantile(&s, 0.9),
        }
    }
}

/// Cross-trial statistics at one recorded step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointAggregate {
    pub t: usize,
    pub eta: f64,
    pub phase: Phase,
    pub subspace_dist: Quantiles,
    pub w_norm: Quantiles,
    /// Fraction of trials with `𝟙_t`.
    pub survival: f64,
    /// `2e√((β+1)/(β+s))` with `s` the Phase II step count; Phase II only.
    pub highprob_bound: Option<f64>,
    /// Fraction of trials with `subspace_dist ≤ highprob_bound`.
    pub highprob_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ViolationCounts {
    pub chain: usize,
    pub delta: usize,
    /// Entries of `validate_assumptions` over `1..=T`.
    pub assumptions: usize,
    /// Trials whose final distance exceeds the Phase II high-probability bound.
    pub highprob_final: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    /// The fully resolved configuration.
    pub config: Value,
    pub schedule: StepSchedule,
    pub seed: u64,
    pub generator: &'static str,
    pub trials: usize,
    pub horizon: usize,
    pub points: Vec<PointAggregate>,
    /// Mean of the per-trial final `𝟙_T`.
    pub survival_fraction: f64,
    pub final_subspace_dist: Quantiles,
    pub final_w_norm: Quantiles,
    pub chain: ChainStats,
    pub delta: DeltaStats,
    pub violations: ViolationCounts,
    /// Slope of log median distance against `log(β + s)` over the last
    /// 63/64 of the Phase II steps.
    pub decay_slope: Option<f64>,
    pub wall_clock_secs: f64,
}

impl ExperimentSummary {
    pub fn build(exp: &ResolvedExperiment, outcomes: &[TrialOutcome], wall_clock_secs: f64) -> Self {
        let schedule = exp.schedule;
        let t0 = schedule.phase1_length;
        let horizon = exp.config.horizon;
        let mut by_t: BTreeMap<usize, Vec<&ojak::oja::TraceRow>> = BTreeMap::new();
        for o in outcomes {
            for r in &o.rows {
                by_t.entry(r.t).or_default().push(r);
            }
        }
        let points: Vec<PointAggregate> = by_t
            .into_iter()
            .map(|(t, rows)| {
                let n = rows.len() as f64;
                let bound =
                    (rows[0].phase == Phase::II && t > t0).then(|| phase2_highprob_bound(schedule.beta, t - t0));
                PointAggregate {
                    t,
                    eta: rows[0].eta,
                    phase: rows[0].phase,
                    subspace_dist: Quantiles::of(rows.iter().map(|r| r.subspace_dist).collect()),
                    w_norm: Quantiles::of(rows.iter().map(|r| r.w_norm).collect()),
                    survival: rows.iter().filter(|r| r.good_event).count() as f64 / n,
                    highprob_bound: bound,
                    highprob_fraction: bound.map(|b| rows.iter().filter(|r| r.subspace_dist <= b).count() as f64 / n),
                }
            })
            .collect();
        let mut chain = ChainStats::default();
        let mut delta = DeltaStats::default();
        for o in outcomes {
            chain.merge(&o.chain);
            delta.merge(&o.delta);
        }
        let final_bound = (horizon > t0).then(|| phase2_highprob_bound(schedule.beta, horizon - t0));
        let highprob_final = final_bound.map_or(0, |b| {
            outcomes.iter().filter(|o| !(o.last().subspace_dist <= b)).count()
        });
        let assumptions = validate_assumptions(&schedule, exp.dist.model(), exp.events.gamma, None, 1..=horizon).len();
        let tail_start = t0.saturating_add((horizon.saturating_sub(t0) / 64).max(1));
        let fit: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.phase == Phase::II && p.t >= tail_start)
            .map(|p| (schedule.beta + (p.t - t0) as f64, p.subspace_dist.median))
            .collect();
        let n = outcomes.len() as f64;
        Self {
            config: serde_json::to_value(&exp.config).expect("config serializes"),
            schedule,
            seed: exp.seed,
            generator: GENERATOR_ID,
            trials: outcomes.len(),
            horizon,
            points,
            survival_fraction: outcomes.iter().filter(|o| o.good_event).count() as f64 / n,
            final_subspace_dist: Quantiles::of(outcomes.iter().map(|o| o.last().subspace_dist).collect()),
            final_w_norm: Quantiles::of(outcomes.iter().map(|o| o.last().w_norm).collect()),
            chain,
            delta,
            violations: ViolationCounts {
                chain: chain.violations,
                delta: delta.violations,
                assumptions,
                highprob_final,
            },
            decay_slope: fit_loglog_slope(&fit),
            wall_clock_secs,
        }
    }

    /// Pretty JSON with object keys in sorted order.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("summary serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_are_monotone() {
        let q = Quantiles::of(vec![5.0, 1.0, f64::INFINITY, 3.0, 2.0]);
        assert_eq!(q.median, 3.0);
        assert!(q.q10 <= q.median && q.median <= q.q90);
        assert_eq!(q.q90, f64::INFINITY);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..20).map(|i| (i as f64, 3.0 * (i as f64).powf(-0.5))).collect();
        assert!((fit_loglog_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(fit_loglog_slope(&pts[..1]), None);
    }
}
