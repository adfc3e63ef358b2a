use serde::Serialize;

use super::AnalysisError;
use crate::linalg::{right_solve, spectral_norm, DenseMatrix};
use crate::oja::apply_update;
use crate::streams::SpectralModel;

/// `W = UᵀZ (VᵀZ)⁻¹`, a (d−k)×k matrix.
///
/// Depends only on the column span of Z. Fails with `Singular` when `VᵀZ`
/// is too ill-conditioned to invert.
pub fn w_matrix(z: &DenseMatrix, v: &DenseMatrix, u: &DenseMatrix) -> Result<DenseMatrix, AnalysisError> {
    let (d, k) = z.shape();
    if v.shape() != (d, k) || k > d {
        return Err(AnalysisError::DimensionMismatch {
            expected: (d, k),
            found: v.shape(),
        });
    }
    if u.shape() != (d, d - k) {
        return Err(AnalysisError::DimensionMismatch {
            expected: (d, d - k),
            found: u.shape(),
        });
    }
    Ok(right_solve(&u.t_matmul(z), &v.t_matmul(z))?)
}

/// Both sides of `W_t(I − Δ_t²) = H_t + J_{t,1} + J_{t,2}` for one step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    /// `‖W_t(I − Δ²) − H − J₁ − J₂‖_F` divided by the size of the largest term.
    pub residual: f64,
    pub delta_norm: f64,
    pub delta_hat_norm: f64,
    pub w_norm: f64,
    pub h_norm: f64,
}

struct Pieces {
    delta: DenseMatrix,
    delta_hat: DenseMatrix,
    h: DenseMatrix,
}

/// `Δ = ηVᵀ(A−M)ZG⁻¹`, `Δ̂ = ηUᵀ(A−M)ZG⁻¹`, `H = Uᵀ(I+ηM)ZG⁻¹` with
/// `G = Vᵀ(I+ηM)Z`.
fn pieces(z_prev: &DenseMatrix, a: &DenseMatrix, eta: f64, model: &SpectralModel) -> Result<Pieces, AnalysisError> {
    let d = model.dim();
    if a.shape() != (d, d) {
        return Err(AnalysisError::DimensionMismatch {
            expected: (d, d),
            found: a.shape(),
        });
    }
    if z_prev.rows() != d || z_prev.cols() != model.k {
        return Err(AnalysisError::DimensionMismatch {
            expected: (d, model.k),
            found: z_prev.shape(),
        });
    }
    let mz = apply_update(z_prev, &model.m, eta);
    let g = model.v.t_matmul(&mz);
    let mut nz = a.sub(&model.m).matmul(z_prev);
    nz.scale_in_place(eta);
    Ok(Pieces {
        delta: right_solve(&model.v.t_matmul(&nz), &g)?,
        delta_hat: right_solve(&model.u.t_matmul(&nz), &g)?,
        h: right_solve(&model.u.t_matmul(&mz), &g)?,
    })
}

/// Evaluate the one-step decomposition of `W_t` from `Z_{t−1}` and sample `A`.
pub fn decomposition_residual(
    z_prev: &DenseMatrix,
    a: &DenseMatrix,
    eta: f64,
    model: &SpectralModel,
) -> Result<DecompositionReport, AnalysisError> {
    let Pieces { delta, delta_hat, h } = pieces(z_prev, a, eta, model)?;
    let w = w_matrix(&apply_update(z_prev, a, eta), &model.v, &model.u)?;
    let delta_sq = delta.matmul(&delta);
    let lhs = w.sub(&w.matmul(&delta_sq));
    let j1 = delta_hat.sub(&h.matmul(&delta));
    let j2 = delta_hat.matmul(&delta).scale(-1.0);
    let rhs = h.add(&j1).add(&j2);
    let w_norm = spectral_norm(&w);
    let delta_norm = spectral_norm(&delta);
    let delta_hat_norm = spectral_norm(&delta_hat);
    let h_norm = spectral_norm(&h);
    // rounding error scales with the largest term of the identity
    let scale = (w_norm * (1.0 + delta_norm * delta_norm))
        .max((h_norm + delta_hat_norm) * (1.0 + delta_norm))
        .max(1.0);
    Ok(DecompositionReport {
        residual: lhs.sub(&rhs).frobenius_norm() / scale,
        delta_norm,
        delta_hat_norm,
        w_norm,
        h_norm,
    })
}

/// `‖Δ_t‖` alone.
pub fn delta_norm(
    z_prev: &DenseMatrix,
    a: &DenseMatrix,
    eta: f64,
    model: &SpectralModel,
) -> Result<f64, AnalysisError> {
    Ok(spectral_norm(&pieces(z_prev, a, eta, model)?.delta))
}
