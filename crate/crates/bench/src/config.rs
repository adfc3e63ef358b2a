//! Experiment configuration: a JSON file, CLI overrides, and the resolved
//! objects the runner consumes.

use std::fs;
use std::path::{Path, PathBuf};

use ojak::analysis::GoodEventConfig;
use ojak::oja::{compute_schedule, ConstantProfile, Phase, ProfileKind, StepSchedule};
use ojak::streams::{DistributionSpec, SampleDistribution};
use serde::{Deserialize, Serialize};

use crate::BenchError;

pub const DEFAULT_OUT_DIR: &str = "ojak-out";

fn default_trials() -> usize {
    1
}

fn default_delta() -> f64 {
    0.1
}

fn default_p_grid() -> Vec<f64> {
    vec![2.0, 4.0, 8.0]
}

/// Schedule constants; any field left out comes from the profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(default = "ScheduleSpec::default_profile")]
    pub profile: ProfileKind,
    #[serde(default)]
    pub phase1_length: Option<usize>,
    #[serde(default)]
    pub phase1_eta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
}

impl ScheduleSpec {
    fn default_profile() -> ProfileKind {
        ProfileKind::Practical
    }
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self {
            profile: ProfileKind::Practical,
            phase1_length: None,
            phase1_eta: None,
            alpha: None,
            beta: None,
        }
    }
}

/// Starting iterate.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    /// i.i.d. standard normal entries.
    #[default]
    Gaussian,
    /// `Z₀ = V + U W₀` with `W₀` a rescaled Gaussian of operator norm
    /// `w_norm`, so `W(Z₀) = W₀` exactly.
    Warm { w_norm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckerName {
    VerifyAssumptions,
    DecompositionResidual,
    SmoothnessCheck,
    ValidateAssumptions,
    TvExact,
    StabilityBoundCheck,
    InitScalingProbe,
}

impl CheckerName {
    pub const ALL: [CheckerName; 7] = [
        Self::VerifyAssumptions,
        Self::DecompositionResidual,
        Self::SmoothnessCheck,
        Self::ValidateAssumptions,
        Self::TvExact,
        Self::StabilityBoundCheck,
        Self::InitScalingProbe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::VerifyAssumptions => "verify_assumptions",
            Self::DecompositionResidual => "decomposition_residual",
            Self::SmoothnessCheck => "smoothness_check",
            Self::ValidateAssumptions => "validate_assumptions",
            Self::TvExact => "tv_exact",
            Self::StabilityBoundCheck => "stability_bound_check",
            Self::InitScalingProbe => "init_scaling_probe",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub distribution: DistributionSpec,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub init: InitSpec,
    /// Horizon.
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_p_grid")]
    pub p_grid: Vec<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub checkers: Vec<CheckerName>,
    #[serde(default)]
    pub threads: Option<usize>,
    /// Good-event threshold; defaults to `√2 e` in Phase II runs and to the
    /// profile's `C_γ` when the run starts in Phase I.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Also check `‖Δ_t‖ ≤ ε_t` on every good step.
    #[serde(default)]
    pub check_delta: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        serde_json::from_str(text).map_err(|e| BenchError::Config(format!("parse: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self, BenchError> {
        let text = fs::read_to_string(path).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub profile: Option<ProfileKind>,
    /// Used only when neither the flag nor the file sets a seed.
    pub env_seed: Option<u64>,
}

impl Overrides {
    /// Read `OJAK_SEED`; an unparsable value is a config error.
    pub fn with_env_seed(mut self) -> Result<Self, BenchError> {
        if let Ok(raw) = std::env::var("OJAK_SEED") {
            let seed = raw
                .trim()
                .parse()
                .map_err(|_| BenchError::Config(format!("OJAK_SEED={raw:?} is not a u64")))?;
            self.env_seed = Some(seed);
        }
        Ok(self)
    }

    pub fn apply(&self, mut config: ExperimentConfig) -> ExperimentConfig {
        config.seed = self.seed.or(config.seed).or(self.env_seed).or(Some(0));
        if self.threads.is_some() {
            config.threads = self.threads;
        }
        if self.out_dir.is_some() {
            config.out_dir = self.out_dir.clone();
        }
        if let Some(p) = self.profile {
            config.schedule.profile = p;
        }
        config
    }
}

/// A validated configuration with its distribution and schedule built.
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub config: ExperimentConfig,
    pub dist: SampleDistribution,
    pub schedule: StepSchedule,
    pub events: GoodEventConfig,
    pub seed: u64,
    pub threads: usize,
    pub out_dir: PathBuf,
}

impl ResolvedExperiment {
    pub fn new(config: ExperimentConfig) -> Result<Self, BenchError> {
        let cfg_err = |m: String| Err(BenchError::Config(m));
        if config.trials == 0 {
            return cfg_err("trials must be at least 1".into());
        }
        if config.horizon == 0 {
            return cfg_err("T must be at least 1".into());
        }
        if !(config.delta > 0.0 && config.delta < 1.0) {
            return cfg_err(format!("delta = {} is outside (0, 1)", config.delta));
        }
        if let Some(p) = config.p_grid.iter().find(|p| !(**p >= 2.0 && p.is_finite())) {
            return cfg_err(format!("p = {p} in p_grid must be finite and at least 2"));
        }
        if config.threads == Some(0) {
            return cfg_err("threads must be at least 1".into());
        }
        if let InitSpec::Warm { w_norm } = config.init {
            if !(w_norm >= 0.0 && w_norm.is_finite()) {
                return cfg_err(format!("warm start norm {w_norm} must be finite and nonnegative"));
            }
        }
        let dist = config
            .distribution
            .build()
            .map_err(|e| BenchError::Config(format!("distribution: {e}")))?;
        let schedule = resolve_schedule(&config, &dist)?;
        let phase1_start = schedule.phase1_length > 0;
        let events = match (config.gamma, phase1_start && dist.is_finite_support()) {
            (g, true) => {
                GoodEventConfig::phase1(g.unwrap_or(ConstantProfile::of_kind(config.schedule.profile).c_gamma))
            }
            (Some(g), false) => GoodEventConfig {
                gamma: g,
                phase: Phase::II,
            },
            (None, false) => GoodEventConfig::default(),
        };
        if !(events.gamma >= 1.0 && events.gamma.is_finite()) {
            return cfg_err(format!("gamma = {} must be finite and at least 1", events.gamma));
        }
        let out_dir = Self::out_dir_of(&config);
        check_writable(&out_dir)?;
        Ok(Self {
            seed: config.seed.unwrap_or(0),
            threads: config.threads.unwrap_or_else(rayon::current_num_threads),
            config,
            dist,
            schedule,
            events,
            out_dir,
        })
    }
}

impl ResolvedExperiment {
    pub fn out_dir_of(config: &ExperimentConfig) -> PathBuf {
        config.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}

fn resolve_schedule(config: &ExperimentConfig, dist: &SampleDistribution) -> Result<StepSchedule, BenchError> {
    let spec = &config.schedule;
    let model = dist.model();
    let profile = ConstantProfile::of_kind(spec.profile);
    let base = compute_schedule(model, dist.dim(), config.delta, &profile)
        .map_err(|e| BenchError::Config(format!("schedule: {e}")))?;
    StepSchedule::new(
        spec.phase1_length.unwrap_or(base.phase1_length),
        spec.phase1_eta.unwrap_or(base.phase1_eta),
        spec.alpha.unwrap_or(base.alpha),
        spec.beta.unwrap_or(base.beta),
        base.rho_k,
    )
    .map_err(|e| BenchError::Config(format!("schedule: {e}")))
}

/// The directory (or its nearest existing ancestor) must be a writable
/// directory. Nothing is created here.
fn check_writable(dir: &Path) -> Result<(), BenchError> {
    let mut probe = Some(dir);
    while let Some(p) = probe {
        if p.as_os_str().is_empty() {
            return Ok(());
        }
        match fs::metadata(p) {
            Ok(meta) if meta.is_dir() && !meta.permissions().readonly() => return Ok(()),
            Ok(meta) if meta.is_dir() => {
                return Err(BenchError::Config(format!("{} is read-only", p.display())));
            }
            Ok(_) => return Err(BenchError::Config(format!("{} is not a directory", p.display()))),
            Err(_) => probe = p.parent(),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "distribution": {"kind": "finite_support", "atoms": [[[2, 0], [0, 1]]], "k": 1},
        "T": 10
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.trials, 1);
        assert_eq!(c.delta, 0.1);
        assert_eq!(c.p_grid, vec![2.0, 4.0, 8.0]);
        assert_eq!(c.init, InitSpec::Gaussian);
        assert!(c.checkers.is_empty());
    }

    #[test]
    fn seed_precedence() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        let env_only = Overrides {
            env_seed: Some(5),
            ..Default::default()
        };
        assert_eq!(env_only.apply(c.clone()).seed, Some(5));
        let mut with_file = c.clone();
        with_file.seed = Some(9);
        assert_eq!(env_only.apply(with_file.clone()).seed, Some(9));
        let flag = Overrides {
            seed: Some(1),
            env_seed: Some(5),
            ..Default::default()
        };
        assert_eq!(flag.apply(with_file).seed, Some(1));
        assert_eq!(Overrides::default().apply(c).seed, Some(0));
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = ExperimentConfig::from_json(MINIMAL).unwrap();
        c.trials = 0;
        assert!(matches!(ResolvedExperiment::new(c), Err(BenchError::Config(_))));
        let mut c = ExperimentConfig::from_json(MINIMAL).unwrap();
        c.delta = 1.5;
        assert!(matches!(ResolvedExperiment::new(c), Err(BenchError::Config(_))));
        let typo = MINIMAL.replace("\"T\"", "\"t\"");
        assert!(ExperimentConfig::from_json(&typo).is_err());
    }

    #[test]
    fn schedule_overrides_apply() {
        let mut c = ExperimentConfig::from_json(MINIMAL).unwrap();
        c.schedule.phase1_length = Some(0);
        c.schedule.beta = Some(50.0);
        let r = ResolvedExperiment::new(c).unwrap();
        assert_eq!(r.schedule.phase1_length, 0);
        assert_eq!(r.schedule.beta, 50.0);
        assert_eq!(r.events, GoodEventConfig::default());
    }
}
