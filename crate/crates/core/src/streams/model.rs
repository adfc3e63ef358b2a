use serde::Serialize;

use super::StreamError;
use crate::linalg::{symmetric_eigendecompose, tol, DenseMatrix};

/// Ground truth for a sample distribution: the mean `M`, its spectrum, the
/// top-k eigenspace `V`, its complement `U`, and the noise bounds.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralModel {
    pub m: DenseMatrix,
    pub eigenvalues: Vec<f64>,
    pub v: DenseMatrix,
    pub u: DenseMatrix,
    pub k: usize,
    pub rho_k: f64,
    /// Almost-sure bound on the Ky Fan (2, k) norm of `A − M`.
    pub noise_bound: f64,
    /// Almost-sure bound on the spectral norm of `A − M`.
    pub noise_spectral_bound: f64,
}

impl SpectralModel {
    pub fn from_mean(
        m: DenseMatrix,
        k: usize,
        noise_bound: f64,
        noise_spectral_bound: f64,
    ) -> Result<Self, StreamError> {
        let d = m.rows();
        if k == 0 || k >= d {
            return Err(StreamError::InvalidK { k, d });
        }
        let eig = symmetric_eigendecompose(&m)?;
        let rho_k = eig.eigenvalues[k - 1] - eig.eigenvalues[k];
        let scale = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if !(rho_k > tol::EIG * scale.max(1.0)) {
            return Err(StreamError::ZeroGap { k, gap: rho_k });
        }
        if !(noise_bound >= 0.0 && noise_bound.is_finite()) {
            return Err(StreamError::InvalidNoise(noise_bound));
        }
        Ok(Self {
            v: eig.top(k),
            u: eig.tail(k),
            eigenvalues: eig.eigenvalues,
            m,
            k,
            rho_k,
            noise_bound,
            noise_spectral_bound,
        })
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    /// `‖M‖`, the spectral norm of the mean.
    pub fn mean_norm(&self) -> f64 {
        let first = self.eigenvalues.first().copied().unwrap_or(0.0);
        let last = self.eigenvalues.last().copied().unwrap_or(0.0);
        first.abs().max(last.abs())
    }

    /// `ρ̄ = min(ρ_k/M, ρ_k/‖M‖, 1)`, with `ρ_k/0` read as +∞.
    pub fn rho_bar(&self) -> f64 {
        let ratio = |den: f64| if den > 0.0 { self.rho_k / den } else { f64::INFINITY };
        ratio(self.noise_bound).min(ratio(self.mean_norm())).min(1.0)
    }

    /// `λ_k` and `λ_{k+1}`.
    pub fn gap_pair(&self) -> (f64, f64) {
        (self.eigenvalues[self.k - 1], self.eigenvalues[self.k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_model() {
        let m = DenseMatrix::from_diag(&[3.0, 1.0, 0.5]);
        let model = SpectralModel::from_mean(m, 1, 1.0, 1.0).unwrap();
        assert_eq!(model.rho_k, 2.0);
        assert_eq!(model.mean_norm(), 3.0);
        assert!((model.rho_bar() - 2.0 / 3.0).abs() < 1e-15);
        assert!(model.v.t_matmul(&model.u).max_abs() < tol::ORTH);
    }

    #[test]
    fn rho_bar_is_one_when_ratios_are_one() {
        let m = DenseMatrix::from_diag(&[1.0, 0.0]);
        let model = SpectralModel::from_mean(m, 1, 1.0, 1.0).unwrap();
        assert_eq!(model.rho_bar(), 1.0);
    }

    #[test]
    fn tie_is_zero_gap() {
        let m = DenseMatrix::from_diag(&[2.0, 1.0, 1.0]);
        assert!(matches!(
            SpectralModel::from_mean(m, 2, 0.0, 0.0),
            Err(StreamError::ZeroGap { k: 2, .. })
        ));
    }
}
