use super::{tol, DenseMatrix, LinalgError};

/// Eigenpairs of a symmetric matrix, eigenvalues sorted descending.
///
/// Column `j` of `eigenvectors` pairs with `eigenvalues[j]`. Each column is
/// signed so that its largest-magnitude entry is positive (lowest index wins
/// ties).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DenseMatrix,
}

impl EigenDecomposition {
    /// `Q Λ Qᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let q = &self.eigenvectors;
        let scaled = DenseMatrix::from_fn(q.rows(), q.cols(), |i, j| q[(i, j)] * self.eigenvalues[j]);
        scaled.matmul_t(q)
    }

    /// Leading `k` eigenvectors.
    pub fn top(&self, k: usize) -> DenseMatrix {
        self.eigenvectors.columns_range(0, k)
    }

    /// Eigenvectors `k..d`.
    pub fn tail(&self, k: usize) -> DenseMatrix {
        self.eigenvectors.columns_range(k, self.eigenvectors.cols())
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn symmetric_eigendecompose(s: &DenseMatrix) -> Result<EigenDecomposition, LinalgError> {
    if !s.is_square() {
        return Err(LinalgError::NotSymmetric { defect: f64::INFINITY });
    }
    let n = s.rows();
    let scale = s.frobenius_norm();
    let defect = s.symmetry_defect();
    if defect > tol::SYM * scale.max(f64::MIN_POSITIVE) {
        return Err(LinalgError::NotSymmetric { defect });
    }
    if !s.is_finite() {
        return Err(LinalgError::NonFinite);
    }

    let mut a = s.symmetrized();
    let mut v = DenseMatrix::identity(n);
    let target = f64::EPSILON * scale;

    let mut converged = false;
    for sweep in 0..tol::MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let g = 100.0 * apq.abs();
                // after a few sweeps, drop entries below the diagonal's ulp
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate(&mut a, &mut v, p, q, c, sn, t);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > target {
        return Err(LinalgError::NoConvergence {
            sweeps: tol::MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = DenseMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    canonicalize_signs(&mut eigenvectors);

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64, t: f64) {
    let n = a.rows();
    let apq = a[(p, q)];
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        let new_p = c * arp - s * arq;
        let new_q = s * arp + c * arq;
        a[(r, p)] = new_p;
        a[(p, r)] = new_p;
        a[(r, q)] = new_q;
        a[(q, r)] = new_q;
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}

/// Flip columns so the largest-magnitude entry is positive.
pub(crate) fn canonicalize_signs(m: &mut DenseMatrix) {
    for j in 0..m.cols() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for i in 0..m.rows() {
            let a = m[(i, j)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if m.rows() > 0 && m[(best, j)] < 0.0 {
            for i in 0..m.rows() {
                m[(i, j)] = -m[(i, j)];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormality_defect;

    #[test]
    fn diagonal_input() {
        let e = symmetric_eigendecompose(&DenseMatrix::from_diag(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 2.0, 1.0]);
        let expected =
            DenseMatrix::from_columns(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(e.eigenvectors, expected);
    }

    #[test]
    fn swap_matrix_closed_form() {
        let s = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = symmetric_eigendecompose(&s).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((e.eigenvalues[1] + 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // (1,1)/√2 for +1; for −1 the tie on |entries| resolves to row 0 positive
        assert!((e.eigenvectors[(0, 0)] - h).abs() < 1e-15);
        assert!((e.eigenvectors[(1, 0)] - h).abs() < 1e-15);
        assert!((e.eigenvectors[(0, 1)] - h).abs() < 1e-15);
        assert!((e.eigenvectors[(1, 1)] + h).abs() < 1e-15);
    }

    #[test]
    fn rejects_asymmetric() {
        let s = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            symmetric_eigendecompose(&s),
            Err(LinalgError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn zero_and_empty() {
        let e = symmetric_eigendecompose(&DenseMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e.eigenvalues, vec![0.0; 3]);
        assert!(orthonormality_defect(&e.eigenvectors) == 0.0);
        let e = symmetric_eigendecompose(&DenseMatrix::zeros(0, 0)).unwrap();
        assert!(e.eigenvalues.is_empty());
    }

    #[test]
    fn repeated_eigenvalues_reconstruct() {
        let s = DenseMatrix::from_rows(&[vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 2.0]]).unwrap();
        let e = symmetric_eigendecompose(&s).unwrap();
        assert!((e.eigenvalues[0] - 4.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[2] - 1.0).abs() < 1e-14);
        assert!(e.reconstruct().sub(&s).max_abs() < 1e-14);
        assert!(orthonormality_defect(&e.eigenvectors) < 1e-14);
    }
}
