use super::{dot, tol, DenseMatrix, LinalgError};

/// Orthonormalize the columns of `z` (d×k, d ≥ k).
///
/// Modified Gram–Schmidt with a second orthogonalization pass per column.
/// The returned factor has the same column span as `z` and a positive
/// implied `R` diagonal.
pub fn gram_schmidt_qr(z: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let (d, k) = z.shape();
    if d < k {
        return Err(LinalgError::DimensionMismatch {
            expected: (k, k),
            found: (d, k),
        });
    }
    // column-major scratch keeps the inner loops contiguous
    let mut cols: Vec<Vec<f64>> = (0..k).map(|j| z.column(j)).collect();
    let largest = cols.iter().map(|c| dot(c, c).sqrt()).fold(0.0_f64, f64::max);
    let threshold = tol::RANK * largest;

    for j in 0..k {
        let (done, rest) = cols.split_at_mut(j);
        let v = &mut rest[0];
        for _pass in 0..2 {
            for q in done.iter() {
                let r = dot(q, v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= r * qi;
                }
            }
        }
        let norm = dot(v, v).sqrt();
        if !(norm > threshold) {
            return Err(LinalgError::RankDeficient { column: j });
        }
        v.iter_mut().for_each(|x| *x /= norm);
    }

    Ok(DenseMatrix::from_fn(d, k, |i, j| cols[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormality_defect;

    #[test]
    fn identity_columns_are_fixed() {
        let z = DenseMatrix::eye(3, 2);
        assert_eq!(gram_schmidt_qr(&z).unwrap(), z);
    }

    #[test]
    fn two_by_two_hand_example() {
        // (1,0), (1,1): second column minus its projection is (0,1)
        let z = DenseMatrix::from_columns(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let q = gram_schmidt_qr(&z).unwrap();
        let expected = DenseMatrix::identity(2);
        for j in 0..2 {
            let sign = q[(j, j)].signum();
            for i in 0..2 {
                assert!((sign * q[(i, j)] - expected[(i, j)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn duplicate_columns_are_rank_deficient() {
        let z = DenseMatrix::from_columns(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(gram_schmidt_qr(&z), Err(LinalgError::RankDeficient { column: 1 }));
    }

    #[test]
    fn zero_matrix_is_rank_deficient() {
        assert!(gram_schmidt_qr(&DenseMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn nearly_dependent_columns_stay_orthonormal() {
        let eps = 1e-9;
        let z = DenseMatrix::from_columns(&[
            vec![1.0, 1.0, 1.0, 1.0],
            vec![1.0, 1.0 + eps, 1.0, 1.0],
            vec![1.0, 1.0, 1.0 + eps, 1.0],
        ])
        .unwrap();
        let q = gram_schmidt_qr(&z).unwrap();
        assert!(orthonormality_defect(&q) < 1e-12);
    }

    #[test]
    fn wide_input_is_rejected() {
        assert!(matches!(
            gram_schmidt_qr(&DenseMatrix::zeros(2, 3)),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }
}
