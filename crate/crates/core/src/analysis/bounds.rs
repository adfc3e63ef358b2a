use std::f64::consts::E;
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::oja::{Phase, StepSchedule, C3, GAMMA_PHASE2};
use crate::streams::SpectralModel;

/// Constants of the main recursion.
pub const C1: f64 = 21.0;
pub const C2: f64 = 5.0;
/// Constant of the constant-step prefix recursion.
pub const C4: f64 = 6.0;

/// `ε_t = 2ηM(1 + γ)`, the almost-sure bound on `‖Δ_t‖` under the good event.
pub fn epsilon_t(eta: f64, m_bound: f64, gamma: f64) -> f64 {
    2.0 * eta * m_bound * (1.0 + gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `ε_t ≤ 1/2`.
    EpsilonAtMostHalf,
    /// `η_t‖M‖ ≤ 1/2`.
    EtaNormAtMostHalf,
    /// `e^{−η_tρ_k/4} ≤ ε_t/ε_{t−1}`.
    EpsilonRatio,
    /// `pε_t² ≤ η_tρ_k/50`.
    SmallP,
    /// `α ≥ 8`.
    AlphaAtLeast8,
    /// `β ≥ 4(1 + √2e)α/ρ̄`.
    BetaLarge,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub t: usize,
    pub condition: Condition,
    pub value: f64,
    pub limit: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} at t={}: {} vs limit {}",
            self.condition, self.t, self.value, self.limit
        )
    }
}

/// Check the recursion hypotheses at every `t` in `t_range` (`t = 0` is skipped).
///
/// The small-p condition is checked only when `p` is given. The `α`/`β`
/// conditions are reported once, at the first Phase II step in range.
pub fn validate_assumptions(
    schedule: &StepSchedule,
    model: &SpectralModel,
    gamma: f64,
    p: Option<f64>,
    t_range: RangeInclusive<usize>,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let m = model.noise_bound;
    let rho = model.rho_k;
    let norm = model.mean_norm();
    let mut phase2_checked = false;
    let start = (*t_range.start()).max(1);
    for t in start..=*t_range.end() {
        let eta = schedule.eta(t);
        let eps = epsilon_t(eta, m, gamma);
        let mut push = |condition, value: f64, limit: f64| {
            out.push(Violation {
                t,
                condition,
                value,
                limit,
            })
        };
        if !(eps <= 0.5) {
            push(Condition::EpsilonAtMostHalf, eps, 0.5);
        }
        if !(eta * norm <= 0.5) {
            push(Condition::EtaNormAtMostHalf, eta * norm, 0.5);
        }
        if t > 1 {
            let prev = epsilon_t(schedule.eta(t - 1), m, gamma);
            if prev > 0.0 {
                let lhs = (-eta * rho / 4.0).exp();
                if !(lhs <= eps / prev) {
                    push(Condition::EpsilonRatio, lhs, eps / prev);
                }
            }
        }
        if let Some(p) = p {
            if !(p * eps * eps <= eta * rho / 50.0) {
                push(Condition::SmallP, p * eps * eps, eta * rho / 50.0);
            }
        }
        if !phase2_checked && schedule.phase(t) == Phase::II {
            phase2_checked = true;
            if !(schedule.alpha >= 8.0) {
                push(Condition::AlphaAtLeast8, schedule.alpha, 8.0);
            }
            let need = 4.0 * (1.0 + GAMMA_PHASE2) * schedule.alpha / model.rho_bar();
            if !(schedule.beta >= need) {
                push(Condition::BetaLarge, schedule.beta, need);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// `e^{−s_tρ}w₀² + C₁pε_t²Σ_{i<t}b_i + C₂pk^{2/p}ε_t²t`, unrolled.
    Full,
    /// `e^{−s_tρ/2}w₀² + C₂pk^{2/p}ε_t²t`.
    SmallP,
    /// Constant-step prefix: `ℓγ²/(2e²)e^{−tηρ/2} + C₄pγ²ε²t`.
    Prefix { ell: f64 },
    /// `k^{2/p}((β+1)/(β+t))^α + pk^{2/p}(C₃α/ρ̄)²t/(β+t)²`, with `t`
    /// counted from the start of Phase II.
    Phase2Poly,
}

/// Upper bound on `‖W_t𝟙_t‖²_{p,p}`.
///
/// `w0_bound` bounds `‖W_0𝟙_0‖_{p,p}` and is ignored by the prefix and
/// polynomial variants. Fails with `AssumptionViolated` when the
/// hypotheses of the variant do not hold on `1..=t`.
pub fn recursion_bound(
    t: usize,
    schedule: &StepSchedule,
    model: &SpectralModel,
    p: f64,
    gamma: f64,
    w0_bound: f64,
    variant: BoundVariant,
) -> Result<f64, AnalysisError> {
    if !(p >= 2.0) {
        return Err(AnalysisError::InvalidP(p));
    }
    let k = model.k as f64;
    let rho = model.rho_k;
    let m = model.noise_bound;
    let kp = k.powf(2.0 / p);
    let check = |p_opt: Option<f64>| {
        let v = validate_assumptions(schedule, model, gamma, p_opt, 1..=t);
        if v.is_empty() {
            Ok(())
        } else {
            Err(AnalysisError::AssumptionViolated(v))
        }
    };
    let tf = t as f64;
    match variant {
        BoundVariant::SmallP => {
            check(Some(p))?;
            let eps = epsilon_t(schedule.eta(t.max(1)), m, gamma);
            let noise = if t == 0 { 0.0 } else { C2 * p * kp * eps * eps * tf };
            Ok((-schedule.cumulative(t) * rho / 2.0).exp() * w0_bound * w0_bound + noise)
        }
        BoundVariant::Full => {
            check(None)?;
            let w0 = w0_bound * w0_bound;
            let mut partial = w0;
            let mut s = 0.0;
            let mut b = w0;
            for i in 1..=t {
                let eta = schedule.eta(i);
                s += eta;
                let eps = epsilon_t(eta, m, gamma);
                b = (-s * rho).exp() * w0 + C1 * p * eps * eps * partial + C2 * p * kp * eps * eps * i as f64;
                partial += b;
            }
            Ok(b)
        }
        BoundVariant::Prefix { ell } => {
            check(None)?;
            let eta = schedule.phase1_eta;
            let eps = epsilon_t(eta, m, gamma);
            Ok(ell * gamma * gamma / (2.0 * E * E) * (-tf * eta * rho / 2.0).exp()
                + C4 * p * gamma * gamma * eps * eps * tf)
        }
        BoundVariant::Phase2Poly => {
            let mut v = Vec::new();
            if !(schedule.alpha >= 8.0) {
                v.push(Violation {
                    t,
                    condition: Condition::AlphaAtLeast8,
                    value: schedule.alpha,
                    limit: 8.0,
                });
            }
            let need = 4.0 * (1.0 + GAMMA_PHASE2) * schedule.alpha / model.rho_bar();
            if !(schedule.beta >= need) {
                v.push(Violation {
                    t,
                    condition: Condition::BetaLarge,
                    value: schedule.beta,
                    limit: need,
                });
            }
            if !v.is_empty() {
                return Err(AnalysisError::AssumptionViolated(v));
            }
            let (a, b) = (schedule.alpha, schedule.beta);
            let c = C3 * a / model.rho_bar();
            Ok(kp * ((b + 1.0) / (b + tf)).powf(a) + p * kp * c * c * tf / ((b + tf) * (b + tf)))
        }
    }
}

/// `2e√((β+1)/(β+T))`.
pub fn phase2_highprob_bound(beta: f64, t: usize) -> f64 {
    2.0 * E * ((beta + 1.0) / (beta + t as f64)).sqrt()
}

/// `C (M/ρ_k) √(log(d/δ)/T)`.
pub fn bernstein_offline_bound(
    m_bound: f64,
    rho_k: f64,
    d: usize,
    delta: f64,
    t: usize,
    c: f64,
) -> Result<f64, AnalysisError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(AnalysisError::InvalidDelta(delta));
    }
    if t == 0 || !(rho_k > 0.0) || !(c > 0.0) {
        return Err(AnalysisError::InvalidArgument(format!(
            "T = {t}, rho_k = {rho_k}, C = {c}"
        )));
    }
    Ok(c * (m_bound / rho_k) * ((d as f64 / delta).ln() / t as f64).sqrt())
}

/// `K₁` and `K₂` of the one-step moment contraction
/// `‖W_t𝟙_t‖² ≤ K₁‖W_{t−1}𝟙_{t−1}‖² + K₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OneStepConstants {
    pub k1: f64,
    pub k2: f64,
}

/// `K₁ = (1+5ε²)(((1+ηλ_{k+1})/(1+ηλ_k))² + 8pε²)`, `K₂ = 5pk^{2/p}ε²`.
pub fn one_step_constants(eta: f64, eps: f64, p: f64, model: &SpectralModel) -> OneStepConstants {
    let (lk, lk1) = model.gap_pair();
    let ratio = (1.0 + eta * lk1) / (1.0 + eta * lk);
    let kp = (model.k as f64).powf(2.0 / p);
    OneStepConstants {
        k1: (1.0 + 5.0 * eps * eps) * (ratio * ratio + 8.0 * p * eps * eps),
        k2: C2 * p * kp * eps * eps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::oja::{compute_schedule, ConstantProfile};

    fn model(noise: f64) -> SpectralModel {
        SpectralModel::from_mean(DenseMatrix::from_diag(&[2.0, 1.0, 0.5, 0.0]), 1, noise, noise).unwrap()
    }

    #[test]
    fn epsilon_arithmetic() {
        assert_eq!(epsilon_t(0.0, 1.0, 3.0), 0.0);
        assert!((epsilon_t(0.1, 1.0, GAMMA_PHASE2) - 0.2 * (1.0 + GAMMA_PHASE2)).abs() < 1e-15);
        assert!((epsilon_t(0.1, 1.0, GAMMA_PHASE2) - 0.968_846).abs() < 1e-6);
        assert_eq!(epsilon_t(0.3, 2.0, 1.0) / epsilon_t(0.3, 2.0, 3.0), 0.5);
    }

    #[test]
    fn constant_step_ratio_is_trivial() {
        let m = model(0.01);
        let s = StepSchedule::constant(0.01, 100, m.rho_k).unwrap();
        let v = validate_assumptions(&s, &m, GAMMA_PHASE2, None, 1..=100);
        assert!(v.iter().all(|v| v.condition != Condition::EpsilonRatio), "{v:?}");
    }

    #[test]
    fn large_step_is_reported() {
        let m = model(0.01);
        let s = StepSchedule::constant(0.3, 10, m.rho_k).unwrap();
        let v = validate_assumptions(&s, &m, GAMMA_PHASE2, None, 1..=3);
        assert!(v
            .iter()
            .any(|v| v.condition == Condition::EtaNormAtMostHalf && (v.value - 0.6).abs() < 1e-12));
    }

    #[test]
    fn theoretical_phase2_passes() {
        let m = model(1.0);
        let s = compute_schedule(&m, 4, 0.1, &ConstantProfile::theoretical()).unwrap();
        let p2 = StepSchedule::phase2_only(s.alpha, s.beta, s.rho_k).unwrap();
        assert!(validate_assumptions(&p2, &m, GAMMA_PHASE2, None, 1..=2000).is_empty());
    }

    #[test]
    fn bound_at_zero_and_without_noise() {
        let m = model(0.0);
        let s = StepSchedule::phase2_only(8.0, 400.0, m.rho_k).unwrap();
        for variant in [BoundVariant::Full, BoundVariant::SmallP] {
            let b = recursion_bound(0, &s, &m, 2.0, GAMMA_PHASE2, 0.7, variant).unwrap();
            assert!((b - 0.49).abs() < 1e-15);
        }
        let t = 50;
        let decay = (-s.cumulative(t) * m.rho_k / 2.0).exp();
        let b = recursion_bound(t, &s, &m, 4.0, GAMMA_PHASE2, 1.0, BoundVariant::SmallP).unwrap();
        assert!((b - decay).abs() < 1e-15);
    }

    #[test]
    fn highprob_and_offline_arithmetic() {
        assert!((phase2_highprob_bound(7.0, 1) - 2.0 * E).abs() < 1e-15);
        assert!((phase2_highprob_bound(0.0, 4) - E).abs() < 1e-15);
        let d = 2;
        let delta = d as f64 / E;
        assert!((bernstein_offline_bound(1.0, 1.0, d, delta, 4, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(bernstein_offline_bound(0.0, 1.0, 10, 0.1, 5, 1.0).unwrap(), 0.0);
        assert!(matches!(
            bernstein_offline_bound(1.0, 1.0, 10, 1.5, 5, 1.0),
            Err(AnalysisError::InvalidDelta(_))
        ));
    }

    #[test]
    fn one_step_without_noise_is_power_ratio() {
        let m = model(0.0);
        let c = one_step_constants(0.1, 0.0, 2.0, &m);
        assert!((c.k1 - (1.1_f64 / 1.2).powi(2)).abs() < 1e-15);
        assert_eq!(c.k2, 0.0);
    }
}
