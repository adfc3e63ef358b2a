//! Oja's algorithm: `Z_t = (I + η_t A_t) Z_{t−1}`, orthonormalized.
//!
//! Because the QR step commutes with the multiplicative update, the column
//! span of the iterate does not depend on how often it is orthonormalized;
//! [`OrthoPolicy`] only trades accuracy against work.

mod run;
mod schedule;
mod state;
mod trace;

pub use run::{run, run_observed, StepObserver, StepView};
pub use schedule::{
    compute_schedule, phase1_length_real, ConstantProfile, Phase, ProfileKind, StepSchedule, C3, GAMMA_PHASE2,
    PHASE1_S, PRACTICAL_T0_CAP,
};
pub use state::{apply_update, gaussian_init, oja_step, oja_step_in_place, OjaState, OrthoPolicy};
pub use trace::{RunTrace, TraceRow, TRACE_CSV_HEADER};

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OjaError {
    #[error("invalid iterate shape d={d}, k={k}")]
    InvalidShape { d: usize, k: usize },
    #[error("step size must be positive and finite, got {0}")]
    InvalidEta(f64),
    #[error("confidence parameter must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("spectral gap must be positive")]
    ZeroGap,
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("a run needs at least one step")]
    EmptyRun,
    #[error("sample has shape {found:?}, expected {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("step {step}: {source}")]
    Linalg {
        step: usize,
        #[source]
        source: LinalgError,
    },
    #[error(transparent)]
    Diagnostics(#[from] AnalysisError),
}
