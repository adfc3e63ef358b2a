use super::{dot, tol, DenseMatrix, LinalgError};

/// Thin singular value decomposition `X = U diag(σ) Vᵀ`.
///
/// For an m×n input, `left` is m×r and `right` is n×r with r = min(m, n).
#[derive(Debug, Clone)]
pub struct SingularDecomposition {
    pub singular_values: Vec<f64>,
    pub left: DenseMatrix,
    pub right: DenseMatrix,
}

impl SingularDecomposition {
    pub fn reconstruct(&self) -> DenseMatrix {
        let u = &self.left;
        let scaled = DenseMatrix::from_fn(u.rows(), u.cols(), |i, j| u[(i, j)] * self.singular_values[j]);
        scaled.matmul_t(&self.right)
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(x: &DenseMatrix) -> Result<SingularDecomposition, LinalgError> {
    if !x.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    if x.rows() < x.cols() {
        let t = svd(&x.transpose())?;
        return Ok(SingularDecomposition {
            singular_values: t.singular_values,
            left: t.right,
            right: t.left,
        });
    }
    let (m, n) = x.shape();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| x.column(j)).collect();
    let mut right: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    orthogonalize_columns(&mut cols, Some(&mut right))?;

    let norms: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let largest = norms.iter().cloned().fold(0.0, f64::max);
    let mut left_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut singular_values = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let s = norms[j];
        singular_values.push(s);
        if s > f64::EPSILON * largest * (m as f64) && s > 0.0 {
            left_cols.push(cols[j].iter().map(|v| v / s).collect());
        } else {
            left_cols.push(vec![0.0; m]);
            deficient.push(slot);
        }
    }
    // complete left vectors of (numerically) zero singular values to an orthonormal set
    for &slot in &deficient {
        let mut candidate = 0;
        loop {
            let mut e = vec![0.0; m];
            e[candidate % m] = 1.0;
            for _pass in 0..2 {
                for (other, col) in left_cols.iter().enumerate() {
                    if other == slot {
                        continue;
                    }
                    let r = dot(col, &e);
                    for (ei, ci) in e.iter_mut().zip(col) {
                        *ei -= r * ci;
                    }
                }
            }
            let nrm = dot(&e, &e).sqrt();
            if nrm > 0.5 {
                left_cols[slot] = e.iter().map(|v| v / nrm).collect();
                break;
            }
            candidate += 1;
        }
    }

    let left = DenseMatrix::from_fn(m, n, |i, j| left_cols[j][i]);
    let right = DenseMatrix::from_fn(n, n, |i, j| right[order[j]][i]);
    Ok(SingularDecomposition {
        singular_values,
        left,
        right,
    })
}

/// Singular values only, descending.
pub fn singular_values(x: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    if !x.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let mut cols: Vec<Vec<f64>> = if x.rows() >= x.cols() {
        (0..x.cols()).map(|j| x.column(j)).collect()
    } else {
        (0..x.rows()).map(|i| x.row(i).to_vec()).collect()
    };
    orthogonalize_columns(&mut cols, None)?;
    let mut s: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Rotate column pairs until all are mutually orthogonal, applying the same
/// rotations to `right` when given.
fn orthogonalize_columns(cols: &mut [Vec<f64>], mut right: Option<&mut Vec<Vec<f64>>>) -> Result<(), LinalgError> {
    let n = cols.len();
    if n < 2 {
        return Ok(());
    }
    // columns this small are numerical zeros; their dot products are noise
    let total: f64 = cols.iter().map(|c| dot(c, c)).sum();
    let floor = f64::EPSILON * f64::EPSILON * total;
    // a stricter cutoff can cycle on pairs orthogonal up to rounding
    let cutoff = f64::EPSILON * cols[0].len() as f64;
    for _sweep in 0..tol::MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= cutoff * (alpha * beta).sqrt() || alpha.min(beta) <= floor {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(cols, p, q, c, s);
                if let Some(r) = right.as_deref_mut() {
                    rotate_pair(r, p, q, c, s);
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(LinalgError::NoConvergence {
        sweeps: tol::MAX_SWEEPS,
    })
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let cp = &mut head[p];
    let cq = &mut tail[0];
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormality_defect;

    #[test]
    fn absolute_diagonal() {
        let x = DenseMatrix::from_diag(&[2.0, -3.0]);
        let d = svd(&x).unwrap();
        assert_eq!(d.singular_values, vec![3.0, 2.0]);
        assert!(d.reconstruct().sub(&x).max_abs() < 1e-15);
    }

    #[test]
    fn rank_deficient_sign_matrix_converges() {
        let x = DenseMatrix::from_rows(&[
            vec![1.0, -1.0, 1.0, 1.0, -1.0],
            vec![1.0, -1.0, 1.0, 1.0, -1.0],
            vec![-1.0, 1.0, 1.0, -1.0, 1.0],
            vec![1.0, 1.0, -1.0, 1.0, 1.0],
            vec![-1.0, 1.0, -1.0, -1.0, 1.0],
        ])
        .unwrap();
        let s = singular_values(&x).unwrap();
        assert!((s.iter().map(|v| v * v).sum::<f64>() - 25.0).abs() < 1e-12);
        assert!(s[4] < 1e-14);
        assert!(svd(&x).unwrap().reconstruct().sub(&x).max_abs() < 1e-13);
    }

    #[test]
    fn zero_matrix() {
        let d = svd(&DenseMatrix::zeros(3, 2)).unwrap();
        assert_eq!(d.singular_values, vec![0.0, 0.0]);
        assert!(orthonormality_defect(&d.left) < 1e-15);
        assert!(orthonormality_defect(&d.right) < 1e-15);
    }

    #[test]
    fn wide_matrix_transposes() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let d = svd(&x).unwrap();
        assert_eq!(d.left.shape(), (2, 2));
        assert_eq!(d.right.shape(), (3, 2));
        assert!(d.reconstruct().sub(&x).max_abs() < 1e-13);
        let s = singular_values(&x).unwrap();
        assert!((s[0] - d.singular_values[0]).abs() < 1e-13);
    }

    #[test]
    fn rank_one_completes_left_basis() {
        let x = DenseMatrix::from_columns(&[vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]]).unwrap();
        let d = svd(&x).unwrap();
        assert!((d.singular_values[0] - 10.0_f64.sqrt()).abs() < 1e-14);
        assert!(d.singular_values[1] < 1e-15);
        assert!(orthonormality_defect(&d.left) < 1e-14);
        assert!(d.reconstruct().sub(&x).max_abs() < 1e-14);
    }
}
