use serde::{Deserialize, Serialize};

use super::OjaError;
use crate::linalg::{gram_schmidt_qr, DenseMatrix};
use crate::rng::{purpose, rng_for};
use crate::streams::gaussian_matrix;

/// When to re-orthonormalize the iterate.
///
/// Orthonormalization commutes with the multiplicative update, so the span
/// is the same under every policy; only overflow and conditioning differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrthoPolicy {
    EveryStep,
    Every(usize),
    /// Only when the caller asks (e.g. once at the end of a run).
    Deferred,
}

impl Default for OrthoPolicy {
    fn default() -> Self {
        Self::EveryStep
    }
}

impl OrthoPolicy {
    pub(crate) fn due(self, t: usize) -> bool {
        match self {
            Self::EveryStep => true,
            Self::Every(n) => n > 0 && t % n == 0,
            Self::Deferred => false,
        }
    }
}

/// Unnormalized iterate `Z_t` with its step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OjaState {
    pub z: DenseMatrix,
    pub t: usize,
    pub last_orthonormalized_at: usize,
}

impl OjaState {
    pub fn new(z0: DenseMatrix) -> Self {
        Self {
            z: z0,
            t: 0,
            last_orthonormalized_at: 0,
        }
    }

    /// Orthonormal basis for the current span.
    pub fn orthonormal(&self) -> Result<DenseMatrix, OjaError> {
        gram_schmidt_qr(&self.z).map_err(|source| OjaError::Linalg { step: self.t, source })
    }
}

/// d×k matrix of i.i.d. standard normals from `seed`.
pub fn gaussian_init(d: usize, k: usize, seed: u64) -> Result<DenseMatrix, OjaError> {
    if k == 0 || d < k {
        return Err(OjaError::InvalidShape { d, k });
    }
    Ok(gaussian_matrix(d, k, &mut rng_for(seed, purpose::INIT)))
}

/// `(I + ηA) Z` without forming `I + ηA`.
pub fn apply_update(z: &DenseMatrix, a: &DenseMatrix, eta: f64) -> DenseMatrix {
    let mut out = a.matmul(z);
    out.scale_in_place(eta);
    out.axpy(1.0, z);
    out
}

/// One step `Z ← (I + ηA) Z`, orthonormalized when `policy` says so.
pub fn oja_step(state: OjaState, a: &DenseMatrix, eta: f64, policy: OrthoPolicy) -> Result<OjaState, OjaError> {
    let mut state = state;
    oja_step_in_place(&mut state, a, eta, policy)?;
    Ok(state)
}

pub fn oja_step_in_place(state: &mut OjaState, a: &DenseMatrix, eta: f64, policy: OrthoPolicy) -> Result<(), OjaError> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(OjaError::InvalidEta(eta));
    }
    let d = state.z.rows();
    if a.shape() != (d, d) {
        return Err(OjaError::DimensionMismatch {
            expected: (d, d),
            found: a.shape(),
        });
    }
    let raw = apply_update(&state.z, a, eta);
    state.t += 1;
    state.z = if policy.due(state.t) {
        state.last_orthonormalized_at = state.t;
        gram_schmidt_qr(&raw).map_err(|source| OjaError::Linalg { step: state.t, source })?
    } else {
        raw
    };
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::subspace_distance;

    #[test]
    fn zero_sample_keeps_span() {
        let z = gaussian_init(4, 2, 1).unwrap();
        let q0 = gram_schmidt_qr(&z).unwrap();
        let s = oja_step(OjaState::new(z), &DenseMatrix::zeros(4, 4), 0.5, OrthoPolicy::EveryStep).unwrap();
        assert!(subspace_distance(&s.z, &q0).unwrap() < 1e-14);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn hand_step() {
        let z = DenseMatrix::from_columns(&[vec![1.0, 1.0]]).unwrap();
        let a = DenseMatrix::from_diag(&[1.0, 0.0]);
        let s = oja_step(OjaState::new(z), &a, 1.0, OrthoPolicy::Deferred).unwrap();
        assert_eq!(s.z.column(0), vec![2.0, 1.0]);
        assert_eq!(s.last_orthonormalized_at, 0);
    }

    #[test]
    fn init_shape_and_determinism() {
        assert_eq!(gaussian_init(5, 2, 9).unwrap(), gaussian_init(5, 2, 9).unwrap());
        assert_ne!(gaussian_init(5, 2, 9).unwrap(), gaussian_init(5, 2, 10).unwrap());
        assert_eq!(gaussian_init(1, 1, 0).unwrap().shape(), (1, 1));
        assert!(matches!(gaussian_init(2, 3, 0), Err(OjaError::InvalidShape { .. })));
        assert!(matches!(gaussian_init(2, 0, 0), Err(OjaError::InvalidShape { .. })));
    }

    #[test]
    fn bad_eta_is_rejected() {
        let s = OjaState::new(DenseMatrix::eye(2, 1));
        assert!(oja_step(s, &DenseMatrix::identity(2), 0.0, OrthoPolicy::EveryStep).is_err());
    }
}
