use serde::Serialize;

use super::AnalysisError;
use crate::linalg::{symmetric_eigendecompose, tol, DenseMatrix};
use crate::oja::{StepObserver, StepView};

/// Top-k eigenvectors of an empirical mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OfflineEstimate {
    pub v_hat: DenseMatrix,
    pub eigenvalues: Vec<f64>,
    pub samples: usize,
}

fn top_k(mean: &DenseMatrix, k: usize, samples: usize) -> Result<OfflineEstimate, AnalysisError> {
    let d = mean.rows();
    if k == 0 || k >= d {
        return Err(AnalysisError::InvalidArgument(format!("k = {k} with d = {d}")));
    }
    let e = symmetric_eigendecompose(&mean.symmetrized())?;
    let scale = e.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
    if e.eigenvalues[k - 1] - e.eigenvalues[k] <= tol::EIG * scale {
        return Err(AnalysisError::ZeroGap);
    }
    Ok(OfflineEstimate {
        v_hat: e.top(k),
        eigenvalues: e.eigenvalues,
        samples,
    })
}

/// Leading `k` eigenvectors of `(1/T) Σ A_i`.
pub fn offline_baseline(samples: &[DenseMatrix], k: usize) -> Result<OfflineEstimate, AnalysisError> {
    let first = samples
        .first()
        .ok_or_else(|| AnalysisError::InvalidArgument("no samples".into()))?;
    let mut acc = OfflineAccumulator::new(first.rows());
    for a in samples {
        acc.push(a)?;
    }
    acc.estimate(k)
}

/// Running sum of the samples seen by a run, for the offline comparison.
#[derive(Debug, Clone)]
pub struct OfflineAccumulator {
    sum: DenseMatrix,
    count: usize,
}

impl OfflineAccumulator {
    pub fn new(d: usize) -> Self {
        Self {
            sum: DenseMatrix::zeros(d, d),
            count: 0,
        }
    }

    pub fn push(&mut self, a: &DenseMatrix) -> Result<(), AnalysisError> {
        if a.shape() != self.sum.shape() {
            return Err(AnalysisError::DimensionMismatch {
                expected: self.sum.shape(),
                found: a.shape(),
            });
        }
        self.sum.axpy(1.0, a);
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn estimate(&self, k: usize) -> Result<OfflineEstimate, AnalysisError> {
        if self.count == 0 {
            return Err(AnalysisError::InvalidArgument("no samples".into()));
        }
        top_k(&self.sum.scale(1.0 / self.count as f64), k, self.count)
    }
}

impl StepObserver for OfflineAccumulator {
    fn on_step(&mut self, view: &StepView<'_>) {
        self.sum.axpy(1.0, view.sample);
        self.count += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::subspace_distance;

    #[test]
    fn exact_mean_recovers_v() {
        let m = DenseMatrix::from_diag(&[1.0, 3.0, 2.0]);
        let est = offline_baseline(&[m.clone(), m.clone()], 2).unwrap();
        let v = DenseMatrix::from_columns(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!(subspace_distance(&est.v_hat, &v).unwrap() < 1e-14);
        assert_eq!(est.samples, 2);
    }

    #[test]
    fn tie_is_rejected() {
        let m = DenseMatrix::from_diag(&[1.0, 1.0, 0.0]);
        assert!(matches!(offline_baseline(&[m], 1), Err(AnalysisError::ZeroGap)));
    }
}
