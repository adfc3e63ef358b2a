use super::{singular_values, tol, DenseMatrix, LinalgError};

/// Schatten p-norm: the ℓ_p norm of the singular values. `p = ∞` gives σ₁.
pub fn schatten_norm(x: &DenseMatrix, p: f64) -> Result<f64, LinalgError> {
    if !(p >= 1.0) {
        return Err(LinalgError::InvalidP(p));
    }
    let s = singular_values(x)?;
    Ok(lp_of_descending(&s, p))
}

/// ℓ_p norm of a descending nonnegative sequence, scaled to avoid overflow.
pub(crate) fn lp_of_descending(s: &[f64], p: f64) -> f64 {
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return top;
    }
    if p == 2.0 {
        return s.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    top * s.iter().map(|v| (v / top).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Ky Fan (2, k) norm: `(σ₁² + … + σ_k²)^{1/2}`.
///
/// Equals `sup ‖Pᵀ X‖_F` over d×k matrices P with orthonormal columns.
pub fn ky_fan_2k_norm(x: &DenseMatrix, k: usize) -> Result<f64, LinalgError> {
    let max = x.rows().min(x.cols());
    if k == 0 || k > max {
        return Err(LinalgError::InvalidK { k, max });
    }
    let s = singular_values(x)?;
    Ok(s[..k].iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Operator (spectral) norm σ₁.
pub fn spectral_norm(x: &DenseMatrix) -> f64 {
    if x.rows() == 0 || x.cols() == 0 {
        return 0.0;
    }
    singular_values(x).map_or(f64::INFINITY, |s| s[0])
}

/// Largest entry of `|QᵀQ − I|`.
pub fn orthonormality_defect(q: &DenseMatrix) -> f64 {
    let g = q.t_matmul(q);
    let mut worst: f64 = 0.0;
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// `‖V Vᵀ − W Wᵀ‖` for two d×k orthonormal frames.
///
/// Evaluated as `‖(I − V Vᵀ) W‖`, which keeps full relative accuracy for
/// nearly-equal subspaces. Both one-sided forms are computed and the larger
/// returned, so the result is exactly symmetric in its arguments.
pub fn subspace_distance(w: &DenseMatrix, v: &DenseMatrix) -> Result<f64, LinalgError> {
    if w.shape() != v.shape() {
        return Err(LinalgError::DimensionMismatch {
            expected: v.shape(),
            found: w.shape(),
        });
    }
    for frame in [w, v] {
        let defect = orthonormality_defect(frame);
        if defect > tol::ORTH {
            return Err(LinalgError::NotOrthonormal { defect });
        }
    }
    let a = residual_norm(w, v);
    let b = residual_norm(v, w);
    Ok(a.max(b).clamp(0.0, 1.0))
}

/// `‖(I − B Bᵀ) A‖`.
fn residual_norm(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let coeff = b.t_matmul(a);
    let residual = a.sub(&b.matmul(&coeff));
    spectral_norm(&residual)
}

/// Symmetric embedding `((0, A), (Aᵀ, 0))`.
pub fn hermitian_dilation(a: &DenseMatrix) -> DenseMatrix {
    let (m, n) = a.shape();
    DenseMatrix::from_fn(m + n, m + n, |i, j| {
        if i < m && j >= m {
            a[(i, j - m)]
        } else if i >= m && j < m {
            a[(j, i - m)]
        } else {
            0.0
        }
    })
}
