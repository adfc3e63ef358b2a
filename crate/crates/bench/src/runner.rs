use ojak::analysis::{ChainStats, DeltaStats, RecordGrid, Tracer, TracerConfig};
use ojak::linalg::{spectral_norm, DenseMatrix};
use ojak::oja::{gaussian_init, run_observed, OrthoPolicy, TraceRow};
use ojak::rng::derive_seed;
use ojak::streams::SpectralModel;
use rayon::prelude::*;

use crate::config::{InitSpec, ResolvedExperiment};
use crate::BenchError;

/// Result of one independent run.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: usize,
    pub rows: Vec<TraceRow>,
    /// `𝟙_T`.
    pub good_event: bool,
    pub chain: ChainStats,
    pub delta: DeltaStats,
}

impl TrialOutcome {
    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("the final step is always recorded")
    }
}

/// `Z₀` for trial seed `seed`.
pub fn initial_iterate(init: &InitSpec, model: &SpectralModel, seed: u64) -> Result<DenseMatrix, BenchError> {
    let (d, k) = model.v.shape();
    let err = |e: ojak::oja::OjaError| BenchError::Runtime(format!("initialization: {e}"));
    match *init {
        InitSpec::Gaussian => gaussian_init(d, k, seed).map_err(err),
        InitSpec::Warm { w_norm } => {
            let g = gaussian_init(d - k, k, seed).map_err(err)?;
            let norm = spectral_norm(&g);
            let w0 = g.scale(if norm > 0.0 { w_norm / norm } else { 0.0 });
            Ok(model.v.add(&model.u.matmul(&w0)))
        }
    }
}

/// Recorded steps: every step up to 10⁴, a geometric grid beyond.
pub fn record_grid(horizon: usize) -> RecordGrid {
    RecordGrid::for_horizon(horizon)
}

fn run_one(exp: &ResolvedExperiment, trial: usize) -> Result<TrialOutcome, BenchError> {
    let seed = derive_seed(exp.seed, trial as u64);
    let z0 = initial_iterate(&exp.config.init, exp.dist.model(), seed)?;
    let config = TracerConfig {
        trial,
        events: exp.events,
        grid: record_grid(exp.config.horizon),
        check_chain: true,
        check_delta: exp.config.check_delta,
        keep_singular_values: false,
    };
    let mut tracer = Tracer::new(&exp.dist, &exp.schedule, config)
        .map_err(|e| BenchError::Runtime(format!("trial {trial}: {e}")))?;
    run_observed(
        &exp.dist,
        &exp.schedule,
        exp.config.horizon,
        &z0,
        seed,
        OrthoPolicy::EveryStep,
        &mut [&mut tracer],
    )
    .map_err(|e| BenchError::Runtime(format!("trial {trial}: {e}")))?;
    Ok(TrialOutcome {
        trial,
        good_event: tracer.good_event(),
        chain: *tracer.chain(),
        delta: *tracer.delta_stats(),
        rows: tracer.into_trace().rows,
    })
}

/// Run every trial on a pool of `exp.threads` workers. Results come back in
/// trial order, so the output does not depend on the thread count.
pub fn run_trials(exp: &ResolvedExperiment) -> Result<Vec<TrialOutcome>, BenchError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(exp.threads)
        .build()
        .map_err(|e| BenchError::Runtime(format!("thread pool: {e}")))?;
    let results: Vec<Result<TrialOutcome, BenchError>> = pool.install(|| {
        (0..exp.config.trials)
            .into_par_iter()
            .map(|i| run_one(exp, i))
            .collect()
    });
    results.into_iter().collect()
}
