//! Streaming k-PCA with Oja's algorithm.
//!
//! The crate is split into four layers:
//!
//! - [`linalg`]: dense matrices, QR, Jacobi eigen/SVD, Schatten and Ky Fan norms.
//! - [`streams`]: sample distributions with a known mean and bounded noise.
//! - [`oja`]: the update, step-size schedules and the run loop.
//! - [`analysis`]: the `W_t` diagnostic, good events, closed-form bounds and
//!   Monte Carlo checkers for the inequalities behind the convergence proof.

pub mod analysis;
pub mod linalg;
pub mod oja;
pub mod rng;
pub mod streams;

pub use linalg::{DenseMatrix, LinalgError};
