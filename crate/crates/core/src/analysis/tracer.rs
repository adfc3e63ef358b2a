use serde::Serialize;

use super::AnalysisError;
use super::{delta_norm, epsilon_t, w_matrix, GoodEventConfig, GoodEventTracker};
use crate::linalg::{
    gram_schmidt_qr, orthonormality_defect, singular_values, spectral_norm, subspace_distance, tol, DenseMatrix,
};
use crate::oja::{Phase, RunTrace, StepObserver, StepSchedule, StepView, TraceRow};
use crate::streams::{SampleDistribution, SpectralModel};

/// Tolerance of the distance/W comparisons.
const CHAIN_TOL: f64 = 1e-8;
/// Longest horizon traced at every step by [`RecordGrid::for_horizon`].
const FULL_TRACE_LIMIT: usize = 10_000;

/// Which steps produce a trace row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordGrid {
    All,
    /// Sorted, deduplicated step indices.
    Points(Vec<usize>),
}

impl RecordGrid {
    pub fn points(mut ts: Vec<usize>) -> Self {
        ts.sort_unstable();
        ts.dedup();
        Self::Points(ts)
    }

    /// `0`, every `⌈1.05^j⌉ ≤ t_max`, and `t_max`.
    pub fn geometric(t_max: usize) -> Self {
        let mut ts = vec![0, t_max];
        let mut x = 1.0_f64;
        while x.ceil() <= t_max as f64 {
            ts.push(x.ceil() as usize);
            x *= 1.05;
        }
        Self::points(ts)
    }

    /// Every step up to 10⁴ steps, the geometric grid beyond.
    pub fn for_horizon(t_max: usize) -> Self {
        if t_max <= FULL_TRACE_LIMIT {
            Self::All
        } else {
            Self::geometric(t_max)
        }
    }

    fn contains(&self, t: usize) -> bool {
        match self {
            Self::All => true,
            Self::Points(ts) => ts.binary_search(&t).is_ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracerConfig {
    pub trial: usize,
    pub events: GoodEventConfig,
    pub grid: RecordGrid,
    /// Compare the subspace distance with `‖W_t‖` and `W(Q_t)` with
    /// `W(Z_t)` at every recorded step.
    pub check_chain: bool,
    /// Compare `‖Δ_t‖` with `ε_t` on every step following a good step.
    pub check_delta: bool,
    /// Store the singular values of `W_t` at recorded steps.
    pub keep_singular_values: bool,
}

impl Default for TracerConfig {
    fn default() -> Self {
        Self {
            trial: 0,
            events: GoodEventConfig::default(),
            grid: RecordGrid::All,
            check_chain: true,
            check_delta: false,
            keep_singular_values: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainStats {
    pub checked: usize,
    /// Recorded steps where `VᵀZ_t` was too ill-conditioned to check.
    pub skipped: usize,
    /// Largest `dist − ‖W_t‖`.
    pub max_dist_excess: f64,
    /// Largest `|‖W(Q_t)‖ − ‖W(Z_t)‖|`.
    pub max_qz_gap: f64,
    pub violations: usize,
}

impl Default for ChainStats {
    fn default() -> Self {
        Self {
            checked: 0,
            skipped: 0,
            max_dist_excess: f64::NEG_INFINITY,
            max_qz_gap: 0.0,
            violations: 0,
        }
    }
}

impl ChainStats {
    pub fn merge(&mut self, other: &Self) {
        self.checked += other.checked;
        self.skipped += other.skipped;
        self.max_dist_excess = self.max_dist_excess.max(other.max_dist_excess);
        self.max_qz_gap = self.max_qz_gap.max(other.max_qz_gap);
        self.violations += other.violations;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DeltaStats {
    pub checked: usize,
    /// Good steps where `η_t‖M‖ > 1/2` or `Δ_t` could not be formed.
    pub skipped: usize,
    /// Largest `‖Δ_t‖ / ε_t`.
    pub max_ratio: f64,
    pub violations: usize,
}

impl DeltaStats {
    pub fn merge(&mut self, other: &Self) {
        self.checked += other.checked;
        self.skipped += other.skipped;
        self.max_ratio = self.max_ratio.max(other.max_ratio);
        self.violations += other.violations;
    }
}

/// Observer that records `W_t` diagnostics and good events.
///
/// A singular `VᵀZ_t` is recorded as `w_norm = +∞` with the good event off;
/// the run itself continues.
#[derive(Debug, Clone)]
pub struct Tracer<'a> {
    model: &'a SpectralModel,
    schedule: StepSchedule,
    config: TracerConfig,
    events: GoodEventTracker,
    rows: Vec<TraceRow>,
    singular: Vec<Vec<f64>>,
    chain: ChainStats,
    delta: DeltaStats,
}

impl<'a> Tracer<'a> {
    pub fn new(
        dist: &'a SampleDistribution,
        schedule: &StepSchedule,
        config: TracerConfig,
    ) -> Result<Self, AnalysisError> {
        Ok(Self {
            model: dist.model(),
            schedule: *schedule,
            events: GoodEventTracker::new(config.events, dist)?,
            config,
            rows: Vec::new(),
            singular: Vec::new(),
            chain: ChainStats::default(),
            delta: DeltaStats::default(),
        })
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    /// Singular values of `W_t` per recorded row (empty when singular or
    /// not kept).
    pub fn singular_values(&self) -> &[Vec<f64>] {
        &self.singular
    }

    pub fn chain(&self) -> &ChainStats {
        &self.chain
    }

    pub fn delta_stats(&self) -> &DeltaStats {
        &self.delta
    }

    pub fn good_event(&self) -> bool {
        self.events.active()
    }

    pub fn into_trace(self) -> RunTrace {
        RunTrace { rows: self.rows }
    }

    fn w(&self, z: &DenseMatrix) -> Option<DenseMatrix> {
        w_matrix(z, &self.model.v, &self.model.u).ok()
    }

    fn record(
        &mut self,
        t: usize,
        eta: f64,
        phase: Phase,
        frame: &DenseMatrix,
        raw: &DenseMatrix,
        w_frame: Option<DenseMatrix>,
    ) {
        let orthonormal = orthonormality_defect(frame) <= tol::ORTH;
        let q = if orthonormal {
            Some(frame.clone())
        } else {
            gram_schmidt_qr(frame).ok()
        };
        let dist = q
            .as_ref()
            .and_then(|q| subspace_distance(q, &self.model.v).ok())
            .unwrap_or(f64::NAN);
        let wq = if orthonormal {
            w_frame
        } else {
            q.as_ref().and_then(|q| self.w(q))
        };
        let w_norm = wq.as_ref().map_or(f64::INFINITY, spectral_norm);
        if self.config.check_chain {
            match (&wq, self.w(raw)) {
                (Some(_), Some(wz)) if dist.is_finite() => {
                    let excess = dist - w_norm;
                    let gap = (w_norm - spectral_norm(&wz)).abs();
                    let s = &mut self.chain;
                    s.checked += 1;
                    s.max_dist_excess = s.max_dist_excess.max(excess);
                    s.max_qz_gap = s.max_qz_gap.max(gap);
                    if excess > CHAIN_TOL || gap > CHAIN_TOL {
                        s.violations += 1;
                    }
                }
                _ => self.chain.skipped += 1,
            }
        }
        if self.config.keep_singular_values {
            self.singular
                .push(wq.as_ref().and_then(|w| singular_values(w).ok()).unwrap_or_default());
        }
        self.rows.push(TraceRow {
            trial: self.config.trial,
            t,
            eta,
            subspace_dist: dist,
            w_norm,
            good_event: self.events.active(),
            phase,
        });
    }
}

impl StepObserver for Tracer<'_> {
    fn on_start(&mut self, z0: &DenseMatrix) {
        let w = self.w(z0);
        self.events.initial(w.as_ref());
        if self.config.grid.contains(0) {
            let phase = if self.schedule.phase1_length > 0 {
                Phase::I
            } else {
                Phase::II
            };
            self.record(0, 0.0, phase, z0, z0, w);
        }
    }

    fn on_step(&mut self, view: &StepView<'_>) {
        if self.config.check_delta && self.events.active() && self.config.events.phase == Phase::II {
            let gamma = self.config.events.gamma;
            let eps = epsilon_t(view.eta, self.model.noise_bound, gamma);
            let applicable = view.eta * self.model.mean_norm() <= 0.5;
            match delta_norm(view.prev, view.sample, view.eta, self.model) {
                Ok(dn) if applicable => {
                    self.delta.checked += 1;
                    if eps > 0.0 {
                        self.delta.max_ratio = self.delta.max_ratio.max(dn / eps);
                    }
                    if dn > eps * (1.0 + 1e-12) {
                        self.delta.violations += 1;
                    }
                }
                _ => self.delta.skipped += 1,
            }
        }
        let w = self.w(view.frame);
        self.events.update(w.as_ref());
        if self.config.grid.contains(view.t) {
            self.record(view.t, view.eta, view.phase, view.frame, view.raw, w);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oja::{run_observed, OrthoPolicy};
    use crate::streams::make_finite_support;

    #[test]
    fn geometric_grid() {
        let RecordGrid::Points(ts) = RecordGrid::geometric(20_000) else {
            panic!()
        };
        assert_eq!(&ts[..4], &[0, 1, 2, 3]);
        assert_eq!(*ts.last().unwrap(), 20_000);
        assert!(ts.len() < 250);
        assert_eq!(RecordGrid::for_horizon(10_000), RecordGrid::All);
    }

    #[test]
    fn traces_a_deterministic_run() {
        let m = DenseMatrix::from_diag(&[5.0, 1.0, 0.0]);
        let dist = make_finite_support(vec![m], vec![1.0], 1).unwrap();
        let sched = StepSchedule::constant(0.1, 100, 4.0).unwrap();
        let z0 = DenseMatrix::from_columns(&[vec![1.0, 0.3, 0.2]]).unwrap();
        let config = TracerConfig {
            check_delta: true,
            keep_singular_values: true,
            ..TracerConfig::default()
        };
        let mut tracer = Tracer::new(&dist, &sched, config).unwrap();
        run_observed(&dist, &sched, 30, &z0, 0, OrthoPolicy::EveryStep, &mut [&mut tracer]).unwrap();
        assert_eq!(tracer.rows().len(), 31);
        assert_eq!(tracer.chain().violations, 0);
        assert_eq!(tracer.chain().checked, 31);
        assert_eq!(tracer.delta_stats().violations, 0);
        assert_eq!(tracer.delta_stats().max_ratio, 0.0);
        let rows = tracer.rows();
        assert!(rows.windows(2).all(|w| w[1].w_norm < w[0].w_norm));
        assert!(rows.iter().all(|r| r.good_event));
        assert_eq!(tracer.singular_values()[5].len(), 1);
    }
}
