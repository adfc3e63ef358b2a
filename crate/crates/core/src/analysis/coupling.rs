use std::collections::BTreeMap;

use serde::Serialize;

use super::{w_matrix, AnalysisError};
use crate::linalg::{orthonormality_defect, spectral_norm, symmetric_eigendecompose, tol, DenseMatrix};

/// Probability law over tuples of atom labels.
pub type TupleLaw = BTreeMap<Vec<usize>, f64>;

/// Largest number of outcomes any law here may enumerate.
pub const MAX_OUTCOMES: usize = 1_000_000;

/// `½ Σ |p_a(x) − p_b(x)|` over the union of both supports.
pub fn tv_exact(a: &TupleLaw, b: &TupleLaw) -> Result<f64, AnalysisError> {
    let union = a.len() + b.keys().filter(|k| !a.contains_key(*k)).count();
    if union > MAX_OUTCOMES {
        return Err(AnalysisError::TooLarge { outcomes: union as f64 });
    }
    let mut sum = 0.0;
    for (x, pa) in a {
        sum += (pa - b.get(x).copied().unwrap_or(0.0)).abs();
    }
    for (x, pb) in b {
        if !a.contains_key(x) {
            sum += pb.abs();
        }
    }
    Ok((0.5 * sum).min(1.0))
}

fn check_weights(weights: &[f64]) -> Result<(), AnalysisError> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
        return Err(AnalysisError::InvalidArgument(
            "weights must be a probability vector".into(),
        ));
    }
    Ok(())
}

fn check_size(n: usize, len: usize) -> Result<(), AnalysisError> {
    let outcomes = (n as f64).powi(len as i32);
    if outcomes > MAX_OUTCOMES as f64 {
        return Err(AnalysisError::TooLarge { outcomes });
    }
    Ok(())
}

/// Call `f(tuple)` for every tuple in `[0, n)^len`, in lexicographic order.
fn for_each_tuple(n: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut tuple = vec![0; len];
    loop {
        f(&tuple);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < n {
                break;
            }
            tuple[i] = 0;
        }
    }
}

/// Law of `t0` independent draws from `weights`.
pub fn iid_tuple_law(weights: &[f64], t0: usize) -> Result<TupleLaw, AnalysisError> {
    check_weights(weights)?;
    check_size(weights.len(), t0)?;
    let mut law = TupleLaw::new();
    for_each_tuple(weights.len(), t0, |x| {
        let p: f64 = x.iter().map(|&i| weights[i]).product();
        if p > 0.0 {
            law.insert(x.to_vec(), p);
        }
    });
    Ok(law)
}

/// Every count vector `c` with `Σc = m`, paired with its multinomial probability.
fn count_vectors(weights: &[f64], m: usize) -> Vec<(Vec<usize>, f64)> {
    let ln_fact: Vec<f64> = (0..=m)
        .scan(0.0, |acc, i| {
            if i > 0 {
                *acc += (i as f64).ln();
            }
            Some(*acc)
        })
        .collect();
    let mut out = Vec::new();
    let mut counts = vec![0; weights.len()];
    fn rec(
        idx: usize,
        left: usize,
        counts: &mut Vec<usize>,
        weights: &[f64],
        ln_fact: &[f64],
        m: usize,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        if idx + 1 == counts.len() {
            counts[idx] = left;
            let mut ln_p = ln_fact[m];
            for (c, w) in counts.iter().zip(weights) {
                if *c > 0 {
                    if *w == 0.0 {
                        return;
                    }
                    ln_p += *c as f64 * w.ln() - ln_fact[*c];
                }
            }
            out.push((counts.clone(), ln_p.exp()));
            return;
        }
        for c in 0..=left {
            counts[idx] = c;
            rec(idx + 1, left - c, counts, weights, ln_fact, m, out);
        }
    }
    rec(0, m, &mut counts, weights, &ln_fact, m, &mut out);
    out
}

fn mixed_tuple_law(
    weights: &[f64],
    m: usize,
    t0: usize,
    tuple_prob: impl Fn(&[usize], &[usize]) -> f64,
) -> Result<TupleLaw, AnalysisError> {
    check_weights(weights)?;
    if m == 0 {
        return Err(AnalysisError::InvalidArgument("m must be positive".into()));
    }
    check_size(weights.len(), t0)?;
    let classes = count_vectors(weights, m);
    if classes.len().saturating_mul(weights.len().pow(t0 as u32)) > MAX_OUTCOMES * 10 {
        return Err(AnalysisError::TooLarge {
            outcomes: classes.len() as f64 * (weights.len() as f64).powi(t0 as i32),
        });
    }
    let mut law = TupleLaw::new();
    for (counts, pc) in &classes {
        for_each_tuple(weights.len(), t0, |x| {
            let p = pc * tuple_prob(counts, x);
            if p > 0.0 {
                *law.entry(x.to_vec()).or_insert(0.0) += p;
            }
        });
    }
    Ok(law)
}

/// Law of `t0` draws with replacement from the empirical measure of `m`
/// i.i.d. atoms drawn from `weights`.
pub fn ghost_tuple_law(weights: &[f64], m: usize, t0: usize) -> Result<TupleLaw, AnalysisError> {
    let mf = m as f64;
    mixed_tuple_law(weights, m, t0, |counts, x| {
        x.iter().map(|&i| counts[i] as f64 / mf).product()
    })
}

/// Law of `t0` draws without replacement from `m` i.i.d. atoms.
pub fn without_replacement_tuple_law(weights: &[f64], m: usize, t0: usize) -> Result<TupleLaw, AnalysisError> {
    if t0 > m {
        return Err(AnalysisError::InvalidArgument(format!("t0 = {t0} exceeds m = {m}")));
    }
    mixed_tuple_law(weights, m, t0, |counts, x| {
        let mut used = vec![0usize; counts.len()];
        let mut p = 1.0;
        for (i, &a) in x.iter().enumerate() {
            if counts[a] <= used[a] {
                return 0.0;
            }
            p *= (counts[a] - used[a]) as f64 / (m - i) as f64;
            used[a] += 1;
        }
        p
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityCheck {
    /// `‖UᵀS(VᵀS)⁻¹‖`.
    pub lhs: f64,
    /// `(2 + 4γ)/(3 − 2γ)`.
    pub rhs: f64,
    /// `‖ÛᵀS(V̂ᵀS)⁻¹‖`.
    pub gamma: f64,
    /// `‖UᵀV̂‖`.
    pub cross: f64,
    pub ok: bool,
}

fn check_frame_pair(u: &DenseMatrix, v: &DenseMatrix, name: &str) -> Result<(), AnalysisError> {
    let (d, k) = v.shape();
    if u.rows() != d || u.cols() + k != d {
        return Err(AnalysisError::PreconditionFailed(format!(
            "{name}: frames do not split R^{d}"
        )));
    }
    let joint = DenseMatrix::from_fn(d, d, |i, j| if j < k { v[(i, j)] } else { u[(i, j - k)] });
    let defect = orthonormality_defect(&joint);
    if defect > tol::ORTH {
        return Err(AnalysisError::PreconditionFailed(format!(
            "{name}: UUᵀ + VVᵀ ≠ I (defect {defect:e})"
        )));
    }
    Ok(())
}

/// Compare `‖UᵀS(VᵀS)⁻¹‖` against `(2+4γ)/(3−2γ)`, where γ is the same
/// quantity measured in the perturbed frames `(Û, V̂)`.
pub fn stability_bound_check(
    u: &DenseMatrix,
    v: &DenseMatrix,
    u_hat: &DenseMatrix,
    v_hat: &DenseMatrix,
    s: &DenseMatrix,
) -> Result<StabilityCheck, AnalysisError> {
    check_frame_pair(u, v, "true frames")?;
    check_frame_pair(u_hat, v_hat, "perturbed frames")?;
    if v_hat.shape() != v.shape() || s.shape() != v.shape() {
        return Err(AnalysisError::DimensionMismatch {
            expected: v.shape(),
            found: s.shape(),
        });
    }
    let cross = spectral_norm(&u.t_matmul(v_hat));
    if !(cross <= 0.5) {
        return Err(AnalysisError::PreconditionFailed(format!("‖UᵀV̂‖ = {cross} > 1/2")));
    }
    let gamma = spectral_norm(&w_matrix(s, v_hat, u_hat)?);
    if !(gamma <= 1.0) {
        return Err(AnalysisError::PreconditionFailed(format!("γ = {gamma} > 1")));
    }
    let lhs = spectral_norm(&w_matrix(s, v, u)?);
    let rhs = (2.0 + 4.0 * gamma) / (3.0 - 2.0 * gamma);
    Ok(StabilityCheck {
        lhs,
        rhs,
        gamma,
        cross,
        ok: lhs <= rhs + tol::EIG,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BernsteinWedinCheck {
    /// `‖M̂ − M‖`.
    pub perturbation: f64,
    pub rho: f64,
    pub rho_hat: f64,
    /// `‖UᵀV̂‖`, U the complement of the top-k space of M and V̂ the top-k
    /// space of M̂.
    pub cross: f64,
    /// Whether `‖M̂ − M‖ ≤ ρ_k/4`.
    pub applicable: bool,
    /// `ρ̂_k ≥ ρ_k/2` and `‖UᵀV̂‖ ≤ 1/3` whenever applicable.
    pub ok: bool,
}

/// Eigengap and eigenspace consequences of a small symmetric perturbation.
pub fn bernstein_wedin_check(
    m: &DenseMatrix,
    m_hat: &DenseMatrix,
    k: usize,
) -> Result<BernsteinWedinCheck, AnalysisError> {
    if m.shape() != m_hat.shape() {
        return Err(AnalysisError::DimensionMismatch {
            expected: m.shape(),
            found: m_hat.shape(),
        });
    }
    let d = m.rows();
    if k == 0 || k >= d {
        return Err(AnalysisError::InvalidArgument(format!("k = {k} with d = {d}")));
    }
    let e = symmetric_eigendecompose(m)?;
    let eh = symmetric_eigendecompose(m_hat)?;
    let rho = e.eigenvalues[k - 1] - e.eigenvalues[k];
    let rho_hat = eh.eigenvalues[k - 1] - eh.eigenvalues[k];
    let perturbation = spectral_norm(&m_hat.sub(m));
    let cross = spectral_norm(&e.tail(k).t_matmul(&eh.top(k)));
    let applicable = perturbation <= rho / 4.0;
    let slack = tol::EIG * m.max_abs().max(1.0);
    Ok(BernsteinWedinCheck {
        perturbation,
        rho,
        rho_hat,
        cross,
        applicable,
        ok: !applicable || (rho_hat >= rho / 2.0 - slack && cross <= 1.0 / 3.0 + tol::EIG),
    })
}
