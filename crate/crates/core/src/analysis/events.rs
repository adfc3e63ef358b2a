use std::f64::consts::{E, SQRT_2};

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::linalg::{spectral_norm, DenseMatrix};
use crate::oja::{Phase, GAMMA_PHASE2};
use crate::streams::SampleDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodEventConfig {
    pub gamma: f64,
    pub phase: Phase,
}

impl Default for GoodEventConfig {
    fn default() -> Self {
        Self {
            gamma: GAMMA_PHASE2,
            phase: Phase::II,
        }
    }
}

impl GoodEventConfig {
    pub fn phase1(gamma: f64) -> Self {
        Self { gamma, phase: Phase::I }
    }
}

/// Incremental good-event indicator `𝟙_0, 𝟙_1, …`.
///
/// Phase II: `𝟙_0 = [‖W_0‖ ≤ 1]`, then `𝟙_i = 𝟙_{i−1} ∧ [‖W_i‖ ≤ γ]`.
///
/// Phase I: `𝟙_i = 𝟙_{i−1} ∧ [max_j ‖B_j W_i‖ ≤ γ]` with
/// `B_j = Vᵀ(A_j − M)U / M` over the support atoms. Only two clauses of the
/// initial event are checked: `‖W_0‖_F ≤ √d γ` and
/// `max_j ‖B_j W_0‖_F ≤ γ/(√2 e)`. The higher-order perturbation families
/// of the full initial event are not enumerated.
#[derive(Debug, Clone)]
pub struct GoodEventTracker {
    config: GoodEventConfig,
    family: Vec<DenseMatrix>,
    sqrt_d: f64,
    active: bool,
}

impl GoodEventTracker {
    pub fn new(config: GoodEventConfig, dist: &SampleDistribution) -> Result<Self, AnalysisError> {
        if !(config.gamma >= 1.0 && config.gamma.is_finite()) {
            return Err(AnalysisError::InvalidArgument(format!("gamma = {}", config.gamma)));
        }
        let model = dist.model();
        let family = match config.phase {
            Phase::II => Vec::new(),
            Phase::I => {
                let (atoms, weights) = dist.support().ok_or(AnalysisError::UnsupportedDistribution)?;
                let scale = model.noise_bound;
                if scale > 0.0 {
                    atoms
                        .iter()
                        .zip(weights)
                        .filter(|(_, &w)| w > 0.0)
                        .map(|(a, _)| {
                            let mut b = model.v.t_matmul(&a.sub(&model.m)).matmul(&model.u);
                            b.scale_in_place(1.0 / scale);
                            b
                        })
                        .collect()
                } else {
                    Vec::new()
                }
            }
        };
        Ok(Self {
            config,
            family,
            sqrt_d: (model.dim() as f64).sqrt(),
            active: true,
        })
    }

    pub fn config(&self) -> GoodEventConfig {
        self.config
    }

    pub fn active(&self) -> bool {
        self.active
    }

    /// Evaluate `𝟙_0`. `None` stands for a singular `VᵀZ_0`.
    pub fn initial(&mut self, w0: Option<&DenseMatrix>) -> bool {
        self.active = match w0 {
            None => false,
            Some(w) => match self.config.phase {
                Phase::II => spectral_norm(w) <= 1.0,
                Phase::I => {
                    w.frobenius_norm() <= self.sqrt_d * self.config.gamma
                        && self
                            .family
                            .iter()
                            .all(|b| b.matmul(w).frobenius_norm() <= self.config.gamma / (SQRT_2 * E))
                }
            },
        };
        self.active
    }

    /// Advance to `𝟙_i` given `W_i`.
    pub fn update(&mut self, w: Option<&DenseMatrix>) -> bool {
        if self.active {
            self.active = w.is_some_and(|w| self.clause(w));
        }
        self.active
    }

    fn clause(&self, w: &DenseMatrix) -> bool {
        let gamma = self.config.gamma;
        match self.config.phase {
            Phase::II => spectral_norm(w) <= gamma,
            Phase::I => self.family.iter().all(|b| spectral_norm(&b.matmul(w)) <= gamma),
        }
    }
}

/// Indicator sequence `𝟙_0, …, 𝟙_T` for a stored sequence `W_0, …, W_T`.
pub fn good_event_monitor(
    ws: &[DenseMatrix],
    config: GoodEventConfig,
    dist: &SampleDistribution,
) -> Result<Vec<bool>, AnalysisError> {
    let mut tracker = GoodEventTracker::new(config, dist)?;
    let mut out = Vec::with_capacity(ws.len());
    for (i, w) in ws.iter().enumerate() {
        out.push(if i == 0 {
            tracker.initial(Some(w))
        } else {
            tracker.update(Some(w))
        });
    }
    Ok(out)
}
