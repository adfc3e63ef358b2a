use rayon::prelude::*;
use serde::Serialize;

use super::AnalysisError;
use crate::linalg::{right_solve, singular_values, spectral_norm, DenseMatrix};
use crate::oja::gaussian_init;
use crate::rng::derive_seed;

/// Empirical tail check `P[‖(VᵀZ₀)⁻¹‖_F ≥ 6√k/δ] ≤ δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailCheck {
    pub delta: f64,
    pub threshold: f64,
    pub fraction: f64,
    /// `δ + 3√(δ(1−δ)/n)`.
    pub allowed: f64,
    pub ok: bool,
}

/// Statistics of `‖W₀‖` and `‖(VᵀZ₀)⁻¹‖_F` for Gaussian `Z₀`, with `V` the
/// first `k` coordinate vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitProbe {
    pub d: usize,
    pub k: usize,
    pub trials: usize,
    /// `√(dk)`.
    pub scale: f64,
    /// 10%, 50% and 90% quantiles of `‖W₀‖`; zeros when `d = k`.
    pub w0_quantiles: [f64; 3],
    pub inverse_quantiles: [f64; 3],
    pub median_in_band: bool,
    pub tail: Vec<TailCheck>,
}

impl InitProbe {
    pub fn passed(&self) -> bool {
        (self.d == self.k || self.median_in_band) && self.tail.iter().all(|t| t.ok)
    }
}

fn quantiles(mut values: Vec<f64>) -> [f64; 3] {
    if values.is_empty() {
        return [0.0; 3];
    }
    values.sort_by(f64::total_cmp);
    let at = |q: f64| values[((values.len() - 1) as f64 * q).round() as usize];
    [at(0.1), at(0.5), at(0.9)]
}

/// Sample `trials` Gaussian initializations and summarize their scaling.
///
/// Trial `i` uses `gaussian_init(d, k, derive_seed(seed, i))`. A singular
/// `VᵀZ₀` counts as an infinite norm.
pub fn init_scaling_probe(d: usize, k: usize, trials: usize, seed: u64) -> Result<InitProbe, AnalysisError> {
    if trials < 100 {
        return Err(AnalysisError::InvalidArgument(format!("trials = {trials} < 100")));
    }
    if k == 0 || d < k {
        return Err(AnalysisError::InvalidArgument(format!("d = {d}, k = {k}")));
    }
    let samples: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let z = gaussian_init(d, k, derive_seed(seed, i as u64)).expect("validated shape");
            let top = z.rows_range(0, k);
            let inv = match singular_values(&top) {
                Ok(s) if s[k - 1] > 0.0 => s.iter().map(|v| 1.0 / (v * v)).sum::<f64>().sqrt(),
                _ => f64::INFINITY,
            };
            let w = if d == k {
                0.0
            } else {
                right_solve(&z.rows_range(k, d), &top).map_or(f64::INFINITY, |w: DenseMatrix| spectral_norm(&w))
            };
            (w, inv)
        })
        .collect();
    let n = trials as f64;
    let scale = ((d * k) as f64).sqrt();
    let w0_quantiles = if d == k {
        [0.0; 3]
    } else {
        quantiles(samples.iter().map(|s| s.0).collect())
    };
    let tail = [0.1, 0.5]
        .into_iter()
        .map(|delta: f64| {
            let threshold = 6.0 * (k as f64).sqrt() / delta;
            let fraction = samples.iter().filter(|s| s.1 >= threshold).count() as f64 / n;
            let allowed = delta + 3.0 * (delta * (1.0 - delta) / n).sqrt();
            TailCheck {
                delta,
                threshold,
                fraction,
                allowed,
                ok: fraction <= allowed,
            }
        })
        .collect();
    Ok(InitProbe {
        d,
        k,
        trials,
        scale,
        median_in_band: w0_quantiles[1] >= 0.2 * scale && w0_quantiles[1] <= 5.0 * scale,
        w0_quantiles,
        inverse_quantiles: quantiles(samples.iter().map(|s| s.1).collect()),
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_case_has_empty_w() {
        let p = init_scaling_probe(3, 3, 100, 1).unwrap();
        assert_eq!(p.w0_quantiles, [0.0; 3]);
        assert!(p.tail.iter().all(|t| t.ok));
    }

    #[test]
    fn scalar_tail() {
        let p = init_scaling_probe(2, 1, 2000, 7).unwrap();
        assert!(p.passed(), "{p:?}");
    }

    #[test]
    fn too_few_trials() {
        assert!(init_scaling_probe(4, 2, 10, 0).is_err());
    }
}
