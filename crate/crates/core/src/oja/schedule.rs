use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use super::OjaError;
use crate::streams::SpectralModel;

/// Numerical constant in the Phase II moment bound (`C₃ < 175`).
pub const C3: f64 = 175.0;
/// Good-event threshold used throughout Phase II.
pub const GAMMA_PHASE2: f64 = std::f64::consts::SQRT_2 * E;
/// The `s` parameter of the Phase I step size and length.
pub const PHASE1_S: f64 = 1.0 / 6.0;
/// Upper limit on the practical Phase I length.
pub const PRACTICAL_T0_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    I,
    II,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::I => "I",
            Phase::II => "II",
        }
    }
}

/// `t ↦ η_t`: constant `phase1_eta` for `t ≤ T0`, then
/// `α / ((β + t − T0) ρ_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub phase1_length: usize,
    pub phase1_eta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rho_k: f64,
}

impl StepSchedule {
    pub fn new(phase1_length: usize, phase1_eta: f64, alpha: f64, beta: f64, rho_k: f64) -> Result<Self, OjaError> {
        let s = Self {
            phase1_length,
            phase1_eta,
            alpha,
            beta,
            rho_k,
        };
        s.validate()?;
        Ok(s)
    }

    /// Decaying steps from `t = 1` (no burn-in).
    pub fn phase2_only(alpha: f64, beta: f64, rho_k: f64) -> Result<Self, OjaError> {
        Self::new(0, alpha / (beta * rho_k), alpha, beta, rho_k)
    }

    /// Constant `eta` for the first `length` steps; decaying afterwards with
    /// `α = 8`, `β = 8/(η ρ_k)` so the step size does not jump.
    pub fn constant(eta: f64, length: usize, rho_k: f64) -> Result<Self, OjaError> {
        Self::new(length, eta, 8.0, 8.0 / (eta * rho_k), rho_k)
    }

    pub fn validate(&self) -> Result<(), OjaError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.phase1_eta) {
            return Err(OjaError::InvalidSchedule(format!("phase1_eta = {}", self.phase1_eta)));
        }
        if !ok(self.alpha) || !ok(self.beta) {
            return Err(OjaError::InvalidSchedule(format!(
                "alpha = {}, beta = {}",
                self.alpha, self.beta
            )));
        }
        if !ok(self.rho_k) {
            return Err(OjaError::ZeroGap);
        }
        Ok(())
    }

    /// Step size at global step `t ≥ 1`.
    pub fn eta(&self, t: usize) -> f64 {
        if t <= self.phase1_length {
            self.phase1_eta
        } else {
            let i = (t - self.phase1_length) as f64;
            self.alpha / ((self.beta + i) * self.rho_k)
        }
    }

    pub fn phase(&self, t: usize) -> Phase {
        if t <= self.phase1_length {
            Phase::I
        } else {
            Phase::II
        }
    }

    /// `s_t = η_1 + … + η_t`.
    pub fn cumulative(&self, t: usize) -> f64 {
        (1..=t).map(|i| self.eta(i)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Theoretical,
    Practical,
}

/// Constants feeding [`compute_schedule`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantProfile {
    pub kind: ProfileKind,
    pub c_eta: f64,
    pub c_t: f64,
    pub c_gamma: f64,
    pub c_beta: f64,
}

impl ConstantProfile {
    /// Constants large enough for every condition in the Phase I proof.
    ///
    /// `C_η` takes the larger of `8 + 4 log 2C_γ` and `8 + 2 log 144C_γ`;
    /// `C_T` the largest of `600e²C_η²`, `(12000e²C_η²C_γ²)^{5/4}` and
    /// `(12000e³C_η²(144C_γ)²)^{5/3}`.
    pub fn theoretical() -> Self {
        let c_gamma = 144.0 * E;
        let c_eta = (8.0 + 4.0 * (2.0 * c_gamma).ln()).max(8.0 + 2.0 * (144.0 * c_gamma).ln());
        let e2 = E * E;
        let c_t = (600.0 * e2 * c_eta * c_eta)
            .max((12000.0 * e2 * c_eta * c_eta * c_gamma * c_gamma).powf(1.25))
            .max((12000.0 * e2 * E * c_eta * c_eta * (144.0 * c_gamma).powi(2)).powf(5.0 / 3.0));
        Self {
            kind: ProfileKind::Theoretical,
            c_eta,
            c_t,
            c_gamma,
            c_beta: 0.0,
        }
    }

    /// Small constants for desk-scale experiments.
    pub fn practical() -> Self {
        Self {
            kind: ProfileKind::Practical,
            c_eta: 8.0,
            c_t: 50.0,
            c_gamma: 144.0 * E,
            c_beta: 20.0,
        }
    }

    pub fn of_kind(kind: ProfileKind) -> Self {
        match kind {
            ProfileKind::Theoretical => Self::theoretical(),
            ProfileKind::Practical => Self::practical(),
        }
    }

    /// True when the Phase I conditions `C_η ≥ 8 + 4 log 2C_γ` and
    /// `C_T ≥ 600e²C_η²` hold.
    pub fn satisfies_phase1_conditions(&self) -> bool {
        self.c_eta >= 8.0 + 4.0 * (2.0 * self.c_gamma).ln() && self.c_t >= 600.0 * E * E * self.c_eta * self.c_eta
    }
}

/// Unrounded Phase I length for `profile`.
///
/// Theoretical: `C_T k log⁴(12ed/(δρ̄s)) / (s²δ²ρ̄²)` with `s = 1/6`.
/// Practical: `C_T k (M/ρ_k)² log d / δ²`.
pub fn phase1_length_real(model: &SpectralModel, d: usize, delta: f64, profile: &ConstantProfile) -> f64 {
    let k = model.k as f64;
    let df = d as f64;
    match profile.kind {
        ProfileKind::Theoretical => {
            let rb = model.rho_bar();
            let s = PHASE1_S;
            let l = (12.0 * E * df / (delta * rb * s)).ln();
            profile.c_t * k * l.powi(4) / (s * s * delta * delta * rb * rb)
        }
        ProfileKind::Practical => {
            let ratio = model.noise_bound / model.rho_k;
            profile.c_t * k * ratio * ratio * df.ln().max(1.0) / (delta * delta)
        }
    }
}

/// Step-size schedule for `model` at confidence `1 − δ`.
///
/// Phase I: `η = C_η log(ed/(sδ)) / (ρ_k T0)`. Phase II: `α = 8` and
/// theoretical `β = max(2(C₃α/ρ̄)² log((C₃α/ρ̄)·2k/δ), 4(1+√2e)α/ρ̄, c_β)`,
/// practical `β = max(c_β (M/ρ_k)² log(2k/δ), 1)`.
pub fn compute_schedule(
    model: &SpectralModel,
    d: usize,
    delta: f64,
    profile: &ConstantProfile,
) -> Result<StepSchedule, OjaError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(OjaError::InvalidDelta(delta));
    }
    if !(model.rho_k > 0.0) {
        return Err(OjaError::ZeroGap);
    }
    let k = model.k as f64;
    let alpha = 8.0;
    let t0_real = phase1_length_real(model, d, delta, profile).ceil().max(1.0);
    let t0 = match profile.kind {
        ProfileKind::Theoretical => t0_real,
        ProfileKind::Practical => t0_real.min(PRACTICAL_T0_CAP as f64),
    };
    let phase1_eta = profile.c_eta * (E * d as f64 / (PHASE1_S * delta)).ln() / (model.rho_k * t0);
    let beta = match profile.kind {
        ProfileKind::Theoretical => {
            let rb = model.rho_bar();
            let c = C3 * alpha / rb;
            (2.0 * c * c * (c * 2.0 * k / delta).ln())
                .max(4.0 * (1.0 + GAMMA_PHASE2) * alpha / rb)
                .max(profile.c_beta)
        }
        ProfileKind::Practical => {
            let ratio = model.noise_bound / model.rho_k;
            (profile.c_beta * ratio * ratio * (2.0 * k / delta).ln()).max(1.0)
        }
    };
    StepSchedule::new(t0 as usize, phase1_eta, alpha, beta, model.rho_k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn model(noise: f64) -> SpectralModel {
        SpectralModel::from_mean(DenseMatrix::from_diag(&[2.0, 1.0, 0.5, 0.0]), 1, noise, noise).unwrap()
    }

    #[test]
    fn phase2_rule() {
        let s = StepSchedule::phase2_only(8.0, 10.0, 0.5).unwrap();
        for i in 1..20 {
            assert_eq!(s.eta(i), 8.0 / ((10.0 + i as f64) * 0.5));
            assert!(s.eta(i + 1) < s.eta(i));
        }
    }

    #[test]
    fn boundary_uses_beta_not_phase1_eta() {
        let s = StepSchedule::new(5, 0.3, 8.0, 100.0, 1.0).unwrap();
        assert_eq!(s.eta(5), 0.3);
        assert_eq!(s.eta(6), 8.0 / 101.0);
        assert_eq!(s.phase(5), Phase::I);
        assert_eq!(s.phase(6), Phase::II);
    }

    #[test]
    fn theoretical_profile_meets_conditions() {
        assert!(ConstantProfile::theoretical().satisfies_phase1_conditions());
        assert!(!ConstantProfile::practical().satisfies_phase1_conditions());
    }

    #[test]
    fn practical_beta_formula() {
        let m = model(2.0);
        let s = compute_schedule(&m, 4, 0.1, &ConstantProfile::practical()).unwrap();
        assert_eq!(s.alpha, 8.0);
        assert!((s.beta - 20.0 * 4.0 * (20.0_f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn invalid_delta() {
        let m = model(1.0);
        for delta in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(matches!(
                compute_schedule(&m, 4, delta, &ConstantProfile::practical()),
                Err(OjaError::InvalidDelta(_))
            ));
        }
    }
}
