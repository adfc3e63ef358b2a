use super::{apply_update, OjaError, OrthoPolicy, Phase, RunTrace, StepSchedule};
use crate::analysis::{Tracer, TracerConfig};
use crate::linalg::{gram_schmidt_qr, DenseMatrix};
use crate::streams::SampleDistribution;

/// Everything an observer sees about step `t`.
#[derive(Debug, Clone, Copy)]
pub struct StepView<'a> {
    pub t: usize,
    pub eta: f64,
    pub phase: Phase,
    pub sample: &'a DenseMatrix,
    /// Stored iterate before the step.
    pub prev: &'a DenseMatrix,
    /// `(I + ηA) Z_{t−1}` before any orthonormalization.
    pub raw: &'a DenseMatrix,
    /// Stored iterate after the step.
    pub frame: &'a DenseMatrix,
}

/// Hook called once before the first step and after every step.
pub trait StepObserver {
    fn on_start(&mut self, _z0: &DenseMatrix) {}
    fn on_step(&mut self, view: &StepView<'_>);
}

/// Run `t_max` steps drawing from `dist` with stream seed `seed`.
///
/// Returns the orthonormalized final iterate. Observers are invoked in slice
/// order. Errors carry the step index at which they occurred.
pub fn run_observed(
    dist: &SampleDistribution,
    schedule: &StepSchedule,
    t_max: usize,
    z0: &DenseMatrix,
    seed: u64,
    policy: OrthoPolicy,
    observers: &mut [&mut dyn StepObserver],
) -> Result<DenseMatrix, OjaError> {
    let d = dist.dim();
    if t_max == 0 {
        return Err(OjaError::EmptyRun);
    }
    if z0.rows() != d || z0.cols() == 0 || z0.cols() > d {
        return Err(OjaError::InvalidShape {
            d: z0.rows(),
            k: z0.cols(),
        });
    }
    schedule.validate()?;
    gram_schmidt_qr(z0).map_err(|source| OjaError::Linalg { step: 0, source })?;
    for o in observers.iter_mut() {
        o.on_start(z0);
    }
    let mut stream = dist.stream(seed);
    let mut z = z0.clone();
    for t in 1..=t_max {
        let sample = stream.next_sample();
        let eta = schedule.eta(t);
        let raw = apply_update(&z, &sample, eta);
        let frame = if policy.due(t) {
            gram_schmidt_qr(&raw).map_err(|source| OjaError::Linalg { step: t, source })?
        } else {
            raw.clone()
        };
        let view = StepView {
            t,
            eta,
            phase: schedule.phase(t),
            sample: &sample,
            prev: &z,
            raw: &raw,
            frame: &frame,
        };
        for o in observers.iter_mut() {
            o.on_step(&view);
        }
        z = frame;
    }
    gram_schmidt_qr(&z).map_err(|source| OjaError::Linalg { step: t_max, source })
}

/// Run with a tracer recording every step (Phase II good events at
/// `γ = √2e`) plus any extra hooks.
pub fn run(
    dist: &SampleDistribution,
    schedule: &StepSchedule,
    t_max: usize,
    z0: &DenseMatrix,
    seed: u64,
    hooks: &mut [&mut dyn StepObserver],
) -> Result<(DenseMatrix, RunTrace), OjaError> {
    let mut tracer = Tracer::new(dist, schedule, TracerConfig::default())?;
    let q = {
        let mut observers: Vec<&mut dyn StepObserver> = Vec::with_capacity(hooks.len() + 1);
        observers.push(&mut tracer);
        for h in hooks.iter_mut() {
            observers.push(&mut **h);
        }
        run_observed(dist, schedule, t_max, z0, seed, OrthoPolicy::EveryStep, &mut observers)?
    };
    Ok((q, tracer.into_trace()))
}
