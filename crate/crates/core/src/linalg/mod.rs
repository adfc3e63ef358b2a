//! Dense real linear algebra used throughout the crate.
//!
//! Everything here is a pure function of its inputs. Decompositions use
//! Jacobi methods (cyclic two-sided for symmetric eigenproblems, one-sided
//! for the SVD), which are slow for large matrices but accurate and fully
//! deterministic at the sizes this crate targets (d up to a few hundred).

mod eigen;
mod matrix;
mod norms;
mod qr;
mod solve;
mod svd;

pub use eigen::{symmetric_eigendecompose, EigenDecomposition};
pub use matrix::DenseMatrix;
pub use norms::{
    hermitian_dilation, ky_fan_2k_norm, orthonormality_defect, schatten_norm, spectral_norm, subspace_distance,
};
pub use qr::gram_schmidt_qr;
pub use solve::{condition_number, right_solve};
pub use svd::{singular_values, svd, SingularDecomposition};

pub(crate) use matrix::dot;

use thiserror::Error;

/// Numerical tolerances shared by the linear algebra routines.
pub mod tol {
    /// Orthonormality and projector equality.
    pub const ORTH: f64 = 1e-10;
    /// Relative reconstruction error of eigen/singular decompositions.
    pub const EIG: f64 = 1e-10;
    /// Relative asymmetry accepted as "symmetric".
    pub const SYM: f64 = 1e-12;
    /// Pivot norm threshold relative to the largest column norm.
    pub const RANK: f64 = 1e-12;
    /// Relative residual of `right_solve`.
    pub const SOLVE: f64 = 1e-10;
    /// Largest condition number accepted by `right_solve`.
    pub const COND_MAX: f64 = 1e12;
    /// Jacobi sweep budget.
    pub const MAX_SWEEPS: usize = 100;
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix has linearly dependent columns (pivot {column} collapsed)")]
    RankDeficient { column: usize },
    #[error("matrix is not symmetric (defect {defect:e})")]
    NotSymmetric { defect: f64 },
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("Schatten index must satisfy p >= 1, got {0}")]
    InvalidP(f64),
    #[error("Ky Fan index k={k} outside 1..={max}")]
    InvalidK { k: usize, max: usize },
    #[error("argument is not orthonormal (defect {defect:e})")]
    NotOrthonormal { defect: f64 },
    #[error("matrix is singular or ill-conditioned (condition {condition:e})")]
    Singular { condition: f64 },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("rows have different lengths")]
    Ragged,
    #[error("non-finite entry")]
    NonFinite,
}
