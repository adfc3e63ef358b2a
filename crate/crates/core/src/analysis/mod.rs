//! Diagnostics for Oja runs and numerical checks of the convergence theory.
//!
//! The central object is `W_t = UᵀZ_t (VᵀZ_t)⁻¹`, whose operator norm
//! upper-bounds the subspace distance of the iterate. Around it sit the
//! good-event monitors, the closed-form bounds of the recursion, Monte Carlo
//! estimators of `L_{p,p}` moments, and exact checks for the coupling and
//! perturbation lemmas used in the burn-in analysis.

mod bounds;
mod coupling;
mod events;
mod init;
mod moments;
mod offline;
mod tracer;
mod wmatrix;

pub use bounds::{
    bernstein_offline_bound, epsilon_t, one_step_constants, phase2_highprob_bound, recursion_bound,
    validate_assumptions, BoundVariant, Condition, OneStepConstants, Violation, C1, C2, C4,
};
pub use coupling::{
    bernstein_wedin_check, ghost_tuple_law, iid_tuple_law, stability_bound_check, tv_exact,
    without_replacement_tuple_law, BernsteinWedinCheck, StabilityCheck, TupleLaw, MAX_OUTCOMES,
};
pub use events::{good_event_monitor, GoodEventConfig, GoodEventTracker};
pub use init::{init_scaling_probe, InitProbe, TailCheck};
pub use moments::{
    lp_norm_estimate, moment_from_powers, schatten_power, smoothness_check, Margin, MomentEstimate, SmoothnessReport,
};
pub use offline::{offline_baseline, OfflineAccumulator, OfflineEstimate};
pub use tracer::{ChainStats, DeltaStats, RecordGrid, Tracer, TracerConfig};
pub use wmatrix::{decomposition_residual, delta_norm, w_matrix, DecompositionReport};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("VᵀZ is singular or ill-conditioned (condition {condition:e})")]
    Singular { condition: f64 },
    #[error("Phase I good events need a finite-support distribution")]
    UnsupportedDistribution,
    #[error("moment index must satisfy p >= 2, got {0}")]
    InvalidP(f64),
    #[error("confidence parameter must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("empirical eigenvalues tie at position k")]
    ZeroGap,
    #[error("{} assumption violation(s), first: {}", .0.len(), .0[0])]
    AssumptionViolated(Vec<Violation>),
    #[error("law has {outcomes} outcomes, more than the enumeration limit")]
    TooLarge { outcomes: f64 },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error(transparent)]
    Linalg(LinalgError),
}

impl From<LinalgError> for AnalysisError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Singular { condition } => Self::Singular { condition },
            other => Self::Linalg(other),
        }
    }
}
