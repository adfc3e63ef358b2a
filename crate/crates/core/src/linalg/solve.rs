use super::{singular_values, tol, DenseMatrix, LinalgError};

/// 2-norm condition number σ_max/σ_min of a square matrix (∞ if singular).
pub fn condition_number(g: &DenseMatrix) -> Result<f64, LinalgError> {
    if !g.is_square() {
        return Err(LinalgError::DimensionMismatch {
            expected: (g.rows(), g.rows()),
            found: g.shape(),
        });
    }
    let s = singular_values(g)?;
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => Ok(hi / lo),
        (Some(_), Some(_)) => Ok(f64::INFINITY),
        _ => Ok(1.0),
    }
}

/// Solve `X G = B` for X (m×k), with G k×k.
///
/// Rejects G whose condition number exceeds [`tol::COND_MAX`]. The solve
/// itself is Gaussian elimination with complete pivoting on `Gᵀ`.
pub fn right_solve(b: &DenseMatrix, g: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let k = g.rows();
    if !g.is_square() || b.cols() != k {
        return Err(LinalgError::DimensionMismatch {
            expected: (b.rows(), k),
            found: b.shape(),
        });
    }
    let condition = condition_number(g)?;
    if !(condition <= tol::COND_MAX) {
        return Err(LinalgError::Singular { condition });
    }
    let lu = PivotedLu::factor(g.transpose());
    let mut x = DenseMatrix::zeros(b.rows(), k);
    for i in 0..b.rows() {
        let sol = lu.solve(b.row(i));
        x.as_mut_slice()[i * k..(i + 1) * k].copy_from_slice(&sol);
    }
    Ok(x)
}

/// `P A Q = L U` with row permutation P and column permutation Q.
struct PivotedLu {
    lu: DenseMatrix,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
}

impl PivotedLu {
    fn factor(mut a: DenseMatrix) -> Self {
        let n = a.rows();
        let mut row_perm: Vec<usize> = (0..n).collect();
        let mut col_perm: Vec<usize> = (0..n).collect();
        for step in 0..n {
            let (mut pr, mut pc, mut best) = (step, step, -1.0);
            for i in step..n {
                for j in step..n {
                    if a[(i, j)].abs() > best {
                        best = a[(i, j)].abs();
                        pr = i;
                        pc = j;
                    }
                }
            }
            if pr != step {
                for j in 0..n {
                    let tmp = a[(step, j)];
                    a[(step, j)] = a[(pr, j)];
                    a[(pr, j)] = tmp;
                }
                row_perm.swap(step, pr);
            }
            if pc != step {
                for i in 0..n {
                    let tmp = a[(i, step)];
                    a[(i, step)] = a[(i, pc)];
                    a[(i, pc)] = tmp;
                }
                col_perm.swap(step, pc);
            }
            let pivot = a[(step, step)];
            if pivot == 0.0 {
                continue;
            }
            for i in step + 1..n {
                let f = a[(i, step)] / pivot;
                a[(i, step)] = f;
                for j in step + 1..n {
                    let v = a[(step, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
        Self {
            lu: a,
            row_perm,
            col_perm,
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        let mut y: Vec<f64> = self.row_perm.iter().map(|&r| rhs[r]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lu[(i, j)] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[(i, j)] * y[j];
            }
            y[i] /= self.lu[(i, i)];
        }
        let mut x = vec![0.0; n];
        for (pos, &c) in self.col_perm.iter().enumerate() {
            x[c] = y[pos];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DenseMatrix {
        DenseMatrix::from_rows(&[vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.5, 2.0]]).unwrap()
    }

    #[test]
    fn identity_returns_rhs() {
        let b = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(right_solve(&b, &DenseMatrix::identity(3)).unwrap(), b);
    }

    #[test]
    fn self_solve_is_identity() {
        let g = sample();
        let x = right_solve(&g, &g).unwrap();
        assert!(x.sub(&DenseMatrix::identity(3)).max_abs() < 1e-14);
    }

    #[test]
    fn residual_is_small() {
        let g = sample();
        let b = DenseMatrix::from_rows(&[vec![1.0, -1.0, 0.5], vec![0.0, 2.0, 7.0]]).unwrap();
        let x = right_solve(&b, &g).unwrap();
        assert!(x.matmul(&g).sub(&b).frobenius_norm() <= tol::SOLVE * b.frobenius_norm());
    }

    #[test]
    fn singular_is_rejected() {
        let g = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            right_solve(&DenseMatrix::identity(2), &g),
            Err(LinalgError::Singular { .. })
        ));
    }
}
