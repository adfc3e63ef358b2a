//! The `verify` subcommand: run the named analysis checkers against the
//! configured instance.

use ojak::analysis::{
    bernstein_wedin_check, decomposition_residual, ghost_tuple_law, iid_tuple_law, init_scaling_probe,
    smoothness_check, stability_bound_check, tv_exact, validate_assumptions, AnalysisError,
};
use ojak::linalg::{spectral_norm, symmetric_eigendecompose, DenseMatrix};
use ojak::oja::{Phase, GAMMA_PHASE2};
use ojak::rng::{purpose, rng_for};
use ojak::streams::verify_assumptions;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CheckerName, ExperimentConfig, ResolvedExperiment};
use crate::BenchError;

const DECOMPOSITION_INSTANCES: usize = 200;
const DECOMPOSITION_TOL: f64 = 1e-10;
const SMOOTHNESS_TRIALS: usize = 2000;
const STABILITY_INSTANCES: usize = 100;
const MEAN_ESTIMATE_SAMPLES: usize = 2000;
const INIT_TRIALS: usize = 200;
const PARAMETRIC_DRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckerResult {
    pub name: &'static str,
    pub passed: bool,
    /// Not applicable to this instance; counts as passed.
    pub skipped: bool,
    pub detail: Value,
}

impl CheckerResult {
    fn new(name: CheckerName, passed: bool, detail: Value) -> Self {
        Self {
            name: name.as_str(),
            passed,
            skipped: false,
            detail,
        }
    }

    fn skipped(name: CheckerName, reason: String) -> Self {
        Self {
            name: name.as_str(),
            passed: true,
            skipped: true,
            detail: json!({ "reason": reason }),
        }
    }

    fn error(name: CheckerName, e: impl std::fmt::Display) -> Self {
        Self::new(name, false, json!({ "error": e.to_string() }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checkers: Vec<CheckerResult>,
}

impl VerifyReport {
    fn from_results(checkers: Vec<CheckerResult>) -> Self {
        Self {
            passed: checkers.iter().all(|c| c.passed),
            checkers,
        }
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
        s.push('\n');
        s
    }
}

/// Run `config.checkers` in order.
///
/// The distribution is the object under test here, so a distribution that
/// fails to build (an asymmetric atom, say) is reported as a failure of
/// every listed checker rather than as a config error.
pub fn run_checkers(config: ExperimentConfig) -> Result<VerifyReport, BenchError> {
    let names = config.checkers.clone();
    if let Err(e) = config.distribution.build() {
        let results = names
            .iter()
            .map(|&n| CheckerResult::error(n, format!("distribution: {e}")))
            .collect();
        return Ok(VerifyReport::from_results(results));
    }
    let exp = ResolvedExperiment::new(config)?;
    let results = names.iter().map(|&n| run_checker(&exp, n)).collect();
    Ok(VerifyReport::from_results(results))
}

fn run_checker(exp: &ResolvedExperiment, name: CheckerName) -> CheckerResult {
    let mut rng = rng_for(exp.seed, purpose::CHECK);
    match name {
        CheckerName::VerifyAssumptions => {
            let report = verify_assumptions(&exp.dist, PARAMETRIC_DRAWS, exp.seed);
            let detail = serde_json::to_value(&report).unwrap_or(Value::Null);
            CheckerResult::new(name, report.passed(), detail)
        }
        CheckerName::DecompositionResidual => decomposition(exp, &mut rng),
        CheckerName::SmoothnessCheck => smoothness(exp, &mut rng),
        CheckerName::ValidateAssumptions => {
            let gamma = if exp.events.phase == Phase::II {
                exp.events.gamma
            } else {
                GAMMA_PHASE2
            };
            let v = validate_assumptions(&exp.schedule, exp.dist.model(), gamma, None, 1..=exp.config.horizon);
            let first: Vec<String> = v.iter().take(10).map(|x| x.to_string()).collect();
            CheckerResult::new(name, v.is_empty(), json!({ "violations": v.len(), "first": first }))
        }
        CheckerName::TvExact => ghost_tv(exp),
        CheckerName::StabilityBoundCheck => stability(exp, &mut rng),
        CheckerName::InitScalingProbe => {
            let (d, k) = exp.dist.model().v.shape();
            match init_scaling_probe(d, k, INIT_TRIALS, exp.seed) {
                Ok(p) => CheckerResult::new(name, p.passed(), serde_json::to_value(&p).unwrap_or(Value::Null)),
                Err(e) => CheckerResult::error(name, e),
            }
        }
    }
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha20Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn decomposition(exp: &ResolvedExperiment, rng: &mut ChaCha20Rng) -> CheckerResult {
    let model = exp.dist.model();
    let (d, k) = model.v.shape();
    let mut evaluated = 0;
    let mut singular = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..DECOMPOSITION_INSTANCES {
        let t = rng.gen_range(1..=exp.config.horizon);
        let eta = exp.schedule.eta(t);
        let z = gaussian(d, k, rng);
        let a = exp.dist.draw(rng);
        match decomposition_residual(&z, &a, eta, model) {
            Ok(r) => {
                evaluated += 1;
                worst = worst.max(r.residual);
            }
            Err(AnalysisError::Singular { .. }) => singular += 1,
            Err(e) => return CheckerResult::error(CheckerName::DecompositionResidual, e),
        }
    }
    CheckerResult::new(
        CheckerName::DecompositionResidual,
        worst <= DECOMPOSITION_TOL,
        json!({ "evaluated": evaluated, "singular": singular, "max_residual": worst, "tolerance": DECOMPOSITION_TOL }),
    )
}

/// Triples `X = UᵀZ`, `Y = ±ηUᵀ(A − M)Z`, `Z' = η²Uᵀ(A − M)²Z` for a fresh
/// Gaussian `Z`, a sample `A` and an independent sign, which makes `Y`
/// centered given `(X, Z')`.
fn smoothness(exp: &ResolvedExperiment, rng: &mut ChaCha20Rng) -> CheckerResult {
    let model = exp.dist.model();
    let (d, k) = model.v.shape();
    let eta = exp.schedule.eta(1).min(1.0);
    let mut reports = Vec::new();
    let mut passed = true;
    for &p in &exp.config.p_grid {
        let r = smoothness_check(
            |_| {
                let z = gaussian(d, k, rng);
                let e = exp.dist.draw(rng).sub(&model.m);
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                let ez = e.matmul(&z);
                let x = model.u.t_matmul(&z);
                let y = model.u.t_matmul(&ez).scale(sign * eta);
                let zz = model.u.t_matmul(&e.matmul(&ez)).scale(eta * eta);
                (x, y, zz)
            },
            p,
            1.0,
            SMOOTHNESS_TRIALS,
        );
        match r {
            Ok(r) => {
                passed &= !r.violated();
                reports.push(serde_json::to_value(r).unwrap_or(Value::Null));
            }
            Err(e) => return CheckerResult::error(CheckerName::SmoothnessCheck, e),
        }
    }
    CheckerResult::new(CheckerName::SmoothnessCheck, passed, json!({ "reports": reports }))
}

fn ghost_tv(exp: &ResolvedExperiment) -> CheckerResult {
    let name = CheckerName::TvExact;
    let Some((_, weights)) = exp.dist.support() else {
        return CheckerResult::skipped(name, "distribution has no finite support".into());
    };
    let t0 = 2;
    let m = ((t0 * t0) as f64 / (2.0 * exp.config.delta)).ceil() as usize;
    let bound = (t0 * t0) as f64 / (2.0 * m as f64);
    let tv = ghost_tuple_law(weights, m, t0).and_then(|g| tv_exact(&g, &iid_tuple_law(weights, t0)?));
    match tv {
        Ok(tv) => CheckerResult::new(name, tv <= bound, json!({ "t0": t0, "m": m, "tv": tv, "bound": bound })),
        Err(AnalysisError::TooLarge { outcomes }) => {
            CheckerResult::skipped(name, format!("enumeration needs {outcomes:e} outcomes"))
        }
        Err(e) => CheckerResult::error(name, e),
    }
}

/// Perturbed frames from the empirical mean of fresh samples.
fn stability(exp: &ResolvedExperiment, rng: &mut ChaCha20Rng) -> CheckerResult {
    let name = CheckerName::StabilityBoundCheck;
    let model = exp.dist.model();
    let (d, k) = model.v.shape();
    let mut m_hat = DenseMatrix::zeros(d, d);
    for _ in 0..MEAN_ESTIMATE_SAMPLES {
        m_hat.axpy(1.0 / MEAN_ESTIMATE_SAMPLES as f64, &exp.dist.draw(rng));
    }
    let m_hat = m_hat.symmetrized();
    let bw = match bernstein_wedin_check(&model.m, &m_hat, k) {
        Ok(bw) => bw,
        Err(e) => return CheckerResult::error(name, e),
    };
    let eh = match symmetric_eigendecompose(&m_hat) {
        Ok(e) => e,
        Err(e) => return CheckerResult::error(name, e),
    };
    let (v_hat, u_hat) = (eh.top(k), eh.tail(k));
    let mut evaluated = 0;
    let mut preconditions_failed = 0;
    let mut failures = 0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..STABILITY_INSTANCES {
        let w = gaussian(d - k, k, rng);
        let norm = spectral_norm(&w);
        let w = w.scale(if norm > 0.0 {
            rng.gen_range(0.0..1.0) / norm
        } else {
            0.0
        });
        let s = v_hat.add(&u_hat.matmul(&w));
        match stability_bound_check(&model.u, &model.v, &u_hat, &v_hat, &s) {
            Ok(c) => {
                evaluated += 1;
                worst_ratio = worst_ratio.max(c.lhs / c.rhs);
                failures += usize::from(!c.ok);
            }
            Err(AnalysisError::PreconditionFailed(_)) => preconditions_failed += 1,
            Err(e) => return CheckerResult::error(name, e),
        }
    }
    CheckerResult::new(
        name,
        bw.ok && failures == 0,
        json!({
            "bernstein_wedin": serde_json::to_value(bw).unwrap_or(Value::Null),
            "evaluated": evaluated,
            "preconditions_failed": preconditions_failed,
            "failures": failures,
            "max_lhs_over_rhs": worst_ratio,
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_list_passes() {
        let c = ExperimentConfig::from_json(
            r#"{"distribution":{"kind":"finite_support","atoms":[[[2,0],[0,1]]],"k":1},"T":5}"#,
        )
        .unwrap();
        let r = run_checkers(c).unwrap();
        assert!(r.passed);
        assert!(r.checkers.is_empty());
    }

    #[test]
    fn asymmetric_atom_fails_verify_assumptions() {
        let c = ExperimentConfig::from_json(
            r#"{"distribution":{"kind":"finite_support","atoms":[[[2,0.5],[0,1]]],"k":1},"T":5,
                "checkers":["verify_assumptions"]}"#,
        )
        .unwrap();
        let r = run_checkers(c).unwrap();
        assert!(!r.passed);
        assert_eq!(r.checkers[0].name, "verify_assumptions");
    }
}
