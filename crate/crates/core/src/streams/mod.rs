//! Sample distributions with a known mean and almost-surely bounded noise.
//!
//! A [`SampleDistribution`] pairs a sampling rule with its ground-truth
//! [`SpectralModel`]: the mean `M`, its top-k eigenspace `V`, the complement
//! `U`, the gap `ρ_k` and an almost-sure bound on the Ky Fan (2, k) norm of
//! `A − M`. Construction fails early with `ZeroGap` when `λ_k = λ_{k+1}`.

mod distribution;
mod ghost;
mod model;
mod spec;
mod verify;

pub(crate) use distribution::gaussian_matrix;
pub use distribution::{
    make_bounded_noise_model, make_finite_support, make_planted_finite_support, SampleDistribution, StreamHandle,
    WEIGHT_TOL,
};
pub use ghost::{ghost_couple, GhostCoupling};
pub use model::SpectralModel;
pub use spec::{BoundedNoiseSpec, DistributionSpec, EigenvalueSpec, FiniteSupportSpec, PlantedSpec};
pub use verify::{verify_assumptions, AssumptionReport};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StreamError {
    #[error("invalid weights: {0}")]
    BadWeights(String),
    #[error("atom {index} has shape {found:?}, expected {expected}x{expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: (usize, usize),
    },
    #[error("atom {index} is not symmetric (defect {defect:e})")]
    NotSymmetric { index: usize, defect: f64 },
    #[error("eigengap at k={k} vanishes (gap {gap:e})")]
    ZeroGap { k: usize, gap: f64 },
    #[error("noise rank {rank} exceeds dimension {d}")]
    InvalidRank { rank: usize, d: usize },
    #[error("k={k} must satisfy 1 <= k < d={d}")]
    InvalidK { k: usize, d: usize },
    #[error("noise scale must be finite and nonnegative, got {0}")]
    InvalidNoise(f64),
    #[error("eigenvalues must be finite and sorted descending")]
    InvalidEigenvalues,
    #[error("a generated spectrum needs an explicit dimension `d`")]
    MissingDimension,
    #[error("distribution has no atoms")]
    Empty,
    #[error("cannot {0}")]
    Unsupported(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
