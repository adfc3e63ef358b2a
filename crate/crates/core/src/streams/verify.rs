use serde::Serialize;

use super::SampleDistribution;
use crate::linalg::{ky_fan_2k_norm, spectral_norm, tol, DenseMatrix};
use crate::rng::{purpose, rng_for};

/// Slack allowed on the almost-sure noise bounds.
pub const BOUND_SLACK: f64 = 1e-12;
/// Entrywise z-score above which an empirical mean is reported as off.
pub const MEAN_Z_MAX: f64 = 5.0;

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    /// True when every atom was checked instead of sampling.
    pub exhaustive: bool,
    pub draws: usize,
    pub noise_bound: f64,
    pub max_ky_fan: f64,
    pub noise_spectral_bound: f64,
    pub max_spectral: f64,
    pub max_symmetry_defect: f64,
    /// Largest entrywise `|mean − M|`.
    pub mean_deviation: f64,
    /// Standard error paired with the entry attaining `max_mean_z`.
    pub mean_stderr: f64,
    pub max_mean_z: f64,
    pub violations: Vec<String>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check symmetry, the Ky Fan (2, k) and spectral noise bounds, and the
/// mean of `dist`. Finite supports are enumerated; parametric laws are
/// sampled `n_draws` times from `seed`.
pub fn verify_assumptions(dist: &SampleDistribution, n_draws: usize, seed: u64) -> AssumptionReport {
    let model = dist.model();
    let d = dist.dim();
    let k = model.k;
    let mut max_ky_fan: f64 = 0.0;
    let mut max_spectral: f64 = 0.0;
    let mut max_sym: f64 = 0.0;
    let mut sym_violation = false;
    let mut observe = |a: &DenseMatrix| {
        let defect = a.symmetry_defect();
        max_sym = max_sym.max(defect);
        if defect > tol::SYM * a.frobenius_norm().max(f64::MIN_POSITIVE) {
            sym_violation = true;
        }
        let e = a.sub(&model.m);
        max_ky_fan = max_ky_fan.max(ky_fan_2k_norm(&e, k).unwrap_or(f64::INFINITY));
        max_spectral = max_spectral.max(spectral_norm(&e));
    };

    let (exhaustive, draws, mean_deviation, mean_stderr, max_mean_z) = match dist.support() {
        Some((atoms, weights)) => {
            let mut mean = DenseMatrix::zeros(d, d);
            for (a, &w) in atoms.iter().zip(weights) {
                if w > 0.0 {
                    observe(a);
                }
                mean.axpy(w, a);
            }
            let dev = mean.sub(&model.m).max_abs();
            (
                true,
                atoms.len(),
                dev,
                0.0,
                if dev > 1e-12 { f64::INFINITY } else { 0.0 },
            )
        }
        None => {
            let mut rng = rng_for(seed, purpose::CHECK);
            let mut sum = DenseMatrix::zeros(d, d);
            let mut sum_sq = vec![0.0; d * d];
            for _ in 0..n_draws {
                let a = dist.draw(&mut rng);
                observe(&a);
                let e = a.sub(&model.m);
                for (s, v) in sum_sq.iter_mut().zip(e.as_slice()) {
                    *s += v * v;
                }
                sum.axpy(1.0, &e);
            }
            let n = n_draws.max(1) as f64;
            let (mut dev, mut se_at, mut zmax) = (0.0_f64, 0.0, 0.0_f64);
            for (idx, &s) in sum.as_slice().iter().enumerate() {
                let mean = s / n;
                let var = (sum_sq[idx] / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
                let se = (var / n).sqrt();
                dev = dev.max(mean.abs());
                let z = if se > 0.0 {
                    mean.abs() / se
                } else if mean.abs() > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                if z > zmax {
                    zmax = z;
                    se_at = se;
                }
            }
            (false, n_draws, dev, se_at, zmax)
        }
    };

    let mut violations = Vec::new();
    if sym_violation {
        violations.push(format!("asymmetric sample (defect {max_sym:e})"));
    }
    if max_ky_fan > model.noise_bound + BOUND_SLACK {
        violations.push(format!(
            "Ky Fan (2,k) noise {max_ky_fan} exceeds bound {}",
            model.noise_bound
        ));
    }
    if max_spectral > model.noise_spectral_bound + BOUND_SLACK {
        violations.push(format!(
            "spectral noise {max_spectral} exceeds bound {}",
            model.noise_spectral_bound
        ));
    }
    if max_mean_z > MEAN_Z_MAX {
        violations.push(format!("mean deviation {mean_deviation:e} (z = {max_mean_z:.2})"));
    }
    AssumptionReport {
        exhaustive,
        draws,
        noise_bound: model.noise_bound,
        max_ky_fan,
        noise_spectral_bound: model.noise_spectral_bound,
        max_spectral,
        max_symmetry_defect: max_sym,
        mean_deviation,
        mean_stderr,
        max_mean_z,
        violations,
    }
}
