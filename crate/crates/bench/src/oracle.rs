//! The `oracle` subcommand: recompute the reference values that the test
//! suite checks against, each next to its closed form where one exists.

use std::f64::consts::{E, PI, SQRT_2};

use ojak::analysis::{
    epsilon_t, ghost_tuple_law, iid_tuple_law, init_scaling_probe, lp_norm_estimate, tv_exact,
    without_replacement_tuple_law,
};
use ojak::linalg::{
    gram_schmidt_qr, hermitian_dilation, singular_values, subspace_distance, symmetric_eigendecompose, DenseMatrix,
};
use ojak::oja::{phase1_length_real, run_observed, ConstantProfile, OrthoPolicy, StepObserver, StepSchedule, StepView};
use ojak::streams::{make_finite_support, SpectralModel};
use serde::Serialize;

use crate::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleValue {
    pub name: &'static str,
    pub value: f64,
    /// Closed-form value, when there is one.
    pub reference: Option<f64>,
}

impl OracleValue {
    fn new(name: &'static str, value: f64, reference: impl Into<Option<f64>>) -> Self {
        Self {
            name,
            value,
            reference: reference.into(),
        }
    }

    pub fn line(&self) -> String {
        match self.reference {
            Some(r) => format!(
                "{:<40} {:>22.15e}  reference {:>22.15e}  |diff| {:.1e}",
                self.name,
                self.value,
                r,
                (self.value - r).abs()
            ),
            None => format!("{:<40} {:>22.15e}", self.name, self.value),
        }
    }
}

struct Distances(Vec<f64>);

impl StepObserver for Distances {
    fn on_step(&mut self, view: &StepView<'_>) {
        let q = gram_schmidt_qr(view.frame).expect("full rank");
        self.0
            .push(subspace_distance(&q, &DenseMatrix::eye(q.rows(), 1)).expect("shapes match"));
    }
}

fn err(e: impl std::fmt::Display) -> BenchError {
    BenchError::Runtime(e.to_string())
}

pub fn derived_values() -> Result<Vec<OracleValue>, BenchError> {
    let mut out = Vec::new();

    let q =
        gram_schmidt_qr(&DenseMatrix::from_columns(&[vec![1.0, 0.0], vec![1.0, 1.0]]).map_err(err)?).map_err(err)?;
    out.push(OracleValue::new(
        "qr_offdiagonal_abs",
        q[(0, 1)].abs() + q[(1, 0)].abs(),
        0.0,
    ));

    let swap = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).map_err(err)?;
    let e = symmetric_eigendecompose(&swap).map_err(err)?;
    out.push(OracleValue::new("swap_eigenvalue_max", e.eigenvalues[0], 1.0));
    out.push(OracleValue::new("swap_eigenvalue_min", e.eigenvalues[1], -1.0));

    let theta: f64 = 0.7;
    let w = DenseMatrix::from_columns(&[vec![theta.cos(), theta.sin()]]).map_err(err)?;
    out.push(OracleValue::new(
        "distance_theta_0.7",
        subspace_distance(&w, &DenseMatrix::eye(2, 1)).map_err(err)?,
        theta.sin(),
    ));

    let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0], vec![3.0, -1.0]]).map_err(err)?;
    let s = singular_values(&a).map_err(err)?;
    let dil = symmetric_eigendecompose(&hermitian_dilation(&a)).map_err(err)?;
    let disc = (16.0_f64 * 16.0 - 4.0 * 59.0).sqrt();
    out.push(OracleValue::new(
        "dilation_top_eigenvalue_sq",
        dil.eigenvalues[0].powi(2),
        (16.0 + disc) / 2.0,
    ));
    out.push(OracleValue::new("dilation_middle_eigenvalue", dil.eigenvalues[2], 0.0));
    out.push(OracleValue::new("sigma_min_sq", s[1] * s[1], (16.0 - disc) / 2.0));

    out.push(OracleValue::new(
        "epsilon_eta0.1_m1",
        epsilon_t(0.1, 1.0, SQRT_2 * E),
        0.2 * (1.0 + SQRT_2 * E),
    ));

    let a1 = DenseMatrix::from_diag(&[1.0, 0.0]);
    let a2 = DenseMatrix::from_diag(&[0.0, 2.0]);
    let lp = lp_norm_estimate(|i| if i % 2 == 0 { a1.clone() } else { a2.clone() }, 2.0, 1000).map_err(err)?;
    out.push(OracleValue::new("two_point_l22_norm", lp.estimate, 2.5_f64.sqrt()));

    let ghost = ghost_tuple_law(&[0.5, 0.5], 4, 2).map_err(err)?;
    let iid = iid_tuple_law(&[0.5, 0.5], 2).map_err(err)?;
    out.push(OracleValue::new(
        "ghost_tv_support2_m4_t2",
        tv_exact(&ghost, &iid).map_err(err)?,
        1.0 / 8.0,
    ));
    out.push(OracleValue::new("ghost_tv_bound_support2_m4_t2", 4.0 / 8.0, None));
    let wor = without_replacement_tuple_law(&[0.2, 0.8], 5, 3).map_err(err)?;
    out.push(OracleValue::new(
        "without_replacement_vs_iid_tv",
        tv_exact(&wor, &iid_tuple_law(&[0.2, 0.8], 3).map_err(err)?).map_err(err)?,
        0.0,
    ));

    let eta = 0.05;
    let dist = make_finite_support(vec![DenseMatrix::from_diag(&[5.0, 1.0, 0.0])], vec![1.0], 1).map_err(err)?;
    let sched = StepSchedule::constant(eta, 1000, 4.0).map_err(err)?;
    let z0 = DenseMatrix::from_columns(&[vec![1.0, 0.7, -0.4]]).map_err(err)?;
    let mut log = Distances(Vec::new());
    run_observed(&dist, &sched, 120, &z0, 0, OrthoPolicy::EveryStep, &mut [&mut log]).map_err(err)?;
    let tan = |s: f64| s / (1.0 - s * s).sqrt();
    out.push(OracleValue::new(
        "power_decay_ratio_eta0.05",
        tan(log.0[119]) / tan(log.0[118]),
        (1.0 + eta) / (1.0 + 5.0 * eta),
    ));

    let dist = make_finite_support(vec![DenseMatrix::from_diag(&[5.0, 1.0])], vec![1.0], 1).map_err(err)?;
    let sched = StepSchedule::constant(0.1, 200, 4.0).map_err(err)?;
    let z0 = DenseMatrix::from_columns(&[vec![0.3, 1.0]]).map_err(err)?;
    let mut log = Distances(Vec::new());
    run_observed(&dist, &sched, 200, &z0, 0, OrthoPolicy::EveryStep, &mut [&mut log]).map_err(err)?;
    out.push(OracleValue::new("power_diag51_dist_T200", log.0[199], None));

    let model = SpectralModel::from_mean(DenseMatrix::from_diag(&[2.0, 1.0, 0.0, 0.0]), 1, 1.0, 1.0).map_err(err)?;
    let profile = ConstantProfile::theoretical();
    let l = |delta: f64| (12.0 * E * 4.0 / (delta * model.rho_bar() * ojak::oja::PHASE1_S)).ln();
    out.push(OracleValue::new(
        "t0_ratio_delta0.05_vs_0.1",
        phase1_length_real(&model, 4, 0.05, &profile) / phase1_length_real(&model, 4, 0.1, &profile),
        4.0 * (l(0.05) / l(0.1)).powi(4),
    ));

    let probe = init_scaling_probe(3, 1, 5000, 0).map_err(err)?;
    for t in &probe.tail {
        if (t.delta - 0.1).abs() < 1e-12 {
            out.push(OracleValue::new("scalar_inverse_tail_delta0.1", t.fraction, None));
            out.push(OracleValue::new(
                "scalar_inverse_tail_bound_delta0.1",
                t.delta / (3.0 * (2.0 * PI).sqrt()),
                None,
            ));
        }
    }
    let probe = init_scaling_probe(64, 4, 500, 0).map_err(err)?;
    out.push(OracleValue::new(
        "init_median_over_sqrt_dk_64_4",
        probe.w0_quantiles[1] / probe.scale,
        None,
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_agree() {
        for v in derived_values().unwrap() {
            if let Some(r) = v.reference {
                assert!((v.value - r).abs() <= 1e-6 * r.abs().max(1.0), "{}", v.line());
            }
        }
    }
}
