use serde::Serialize;

use super::AnalysisError;
use crate::linalg::{singular_values, DenseMatrix};

/// `‖X‖_p^p = Σ σ_i^p`.
pub fn schatten_power(x: &DenseMatrix, p: f64) -> Result<f64, AnalysisError> {
    Ok(singular_values(x)?.iter().map(|s| s.powf(p)).sum())
}

/// Monte Carlo estimate of `‖X‖_{p,p} = (E‖X‖_p^p)^{1/p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub p: f64,
    pub trials: usize,
    /// Sample mean of `‖X‖_p^p`.
    pub power_mean: f64,
    pub power_stderr: f64,
    pub estimate: f64,
    /// Delta-method standard error of `estimate`.
    pub stderr: f64,
}

impl MomentEstimate {
    /// `‖X‖²_{p,p}` with its delta-method standard error.
    pub fn squared(&self) -> (f64, f64) {
        let value = self.power_mean.powf(2.0 / self.p);
        let se = if self.power_mean > 0.0 {
            2.0 / self.p * self.power_mean.powf(2.0 / self.p - 1.0) * self.power_stderr
        } else {
            0.0
        };
        (value, se)
    }
}

/// Build the estimate from per-trial values of `‖X_i‖_p^p`.
pub fn moment_from_powers(powers: &[f64], p: f64) -> Result<MomentEstimate, AnalysisError> {
    if !(p >= 2.0) || p.is_infinite() {
        return Err(AnalysisError::InvalidP(p));
    }
    if powers.is_empty() {
        return Err(AnalysisError::InvalidArgument("no trials".into()));
    }
    let n = powers.len() as f64;
    let mean = powers.iter().sum::<f64>() / n;
    let var = if powers.len() > 1 {
        powers.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let power_stderr = (var / n).sqrt();
    let estimate = mean.powf(1.0 / p);
    let stderr = if mean > 0.0 {
        mean.powf(1.0 / p - 1.0) * power_stderr / p
    } else {
        0.0
    };
    Ok(MomentEstimate {
        p,
        trials: powers.len(),
        power_mean: mean,
        power_stderr,
        estimate,
        stderr,
    })
}

/// Estimate `‖X‖_{p,p}` from `trials` calls of `sampler(i)`.
pub fn lp_norm_estimate<F>(mut sampler: F, p: f64, trials: usize) -> Result<MomentEstimate, AnalysisError>
where
    F: FnMut(usize) -> DenseMatrix,
{
    if !(p >= 2.0) || p.is_infinite() {
        return Err(AnalysisError::InvalidP(p));
    }
    let powers = (0..trials)
        .map(|i| schatten_power(&sampler(i), p))
        .collect::<Result<Vec<_>, _>>()?;
    moment_from_powers(&powers, p)
}

/// `rhs − lhs` of one inequality with a linearized standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Margin {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub stderr: f64,
    /// True only when `margin < −3·stderr` (beyond rounding).
    pub violated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub p: f64,
    pub lambda: f64,
    pub trials: usize,
    /// `‖X+Y‖²_{p,p} ≤ ‖X‖²_{p,p} + (p−1)‖Y‖²_{p,p}`.
    pub two_term: Margin,
    /// `‖X+Y+Z‖²_{p,p} ≤ (1+λ)(‖X‖²_{p,p} + (p−1)‖Y‖²_{p,p} + λ⁻¹‖Z‖²_{p,p})`.
    pub three_term: Margin,
}

impl SmoothnessReport {
    pub fn violated(&self) -> bool {
        self.two_term.violated || self.three_term.violated
    }
}

/// Monte Carlo check of the uniform smoothness inequalities.
///
/// `sampler(i)` returns `(X, Y, Z)` with `E[Y | X, Z] = 0`. Each side is a
/// smooth function of several sample means of Schatten powers, so the
/// margin's standard error is computed from the per-trial linearization,
/// which accounts for the correlation between the two sides.
pub fn smoothness_check<F>(
    mut sampler: F,
    p: f64,
    lambda: f64,
    trials: usize,
) -> Result<SmoothnessReport, AnalysisError>
where
    F: FnMut(usize) -> (DenseMatrix, DenseMatrix, DenseMatrix),
{
    if !(p >= 2.0) || p.is_infinite() {
        return Err(AnalysisError::InvalidP(p));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(AnalysisError::InvalidArgument(format!("lambda = {lambda}")));
    }
    if trials < 2 {
        return Err(AnalysisError::InvalidArgument("need at least two trials".into()));
    }
    // Columns: X, Y, Z, X+Y, X+Y+Z.
    let mut cols: [Vec<f64>; 5] = Default::default();
    for i in 0..trials {
        let (x, y, z) = sampler(i);
        let xy = x.add(&y);
        let xyz = xy.add(&z);
        for (c, m) in cols.iter_mut().zip([&x, &y, &z, &xy, &xyz]) {
            c.push(schatten_power(m, p)?);
        }
    }
    let n = trials as f64;
    let means: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    let g = |m: f64| m.powf(2.0 / p);
    let dg = |m: f64| if m > 0.0 { 2.0 / p * m.powf(2.0 / p - 1.0) } else { 0.0 };
    let margin = |coef: [f64; 5]| {
        let value: f64 = (0..5).map(|c| coef[c] * g(means[c])).sum();
        let slopes: Vec<f64> = (0..5).map(|c| coef[c] * dg(means[c])).collect();
        let psi: Vec<f64> = (0..trials)
            .map(|i| (0..5).map(|c| slopes[c] * (cols[c][i] - means[c])).sum())
            .collect();
        let var = psi.iter().map(|v| v * v).sum::<f64>() / (n - 1.0);
        let stderr = (var / n).sqrt();
        let lhs: f64 = (0..5).filter(|&c| coef[c] < 0.0).map(|c| -coef[c] * g(means[c])).sum();
        let rhs = value + lhs;
        let slack = 1e-12 * lhs.abs().max(rhs.abs()).max(1e-300);
        Margin {
            lhs,
            rhs,
            margin: value,
            stderr,
            violated: value < -3.0 * stderr - slack,
        }
    };
    let two_term = margin([1.0, p - 1.0, 0.0, -1.0, 0.0]);
    let l = 1.0 + lambda;
    let three_term = margin([l, l * (p - 1.0), l / lambda, 0.0, -1.0]);
    Ok(SmoothnessReport {
        p,
        lambda,
        trials,
        two_term,
        three_term,
    })
}
