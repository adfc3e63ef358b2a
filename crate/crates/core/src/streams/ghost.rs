use std::collections::BTreeMap;

use super::{make_finite_support, SampleDistribution, StreamError};
use crate::rng::{purpose, rng_for};

/// A finite-support surrogate built from `m` pre-drawn atoms.
#[derive(Debug, Clone)]
pub struct GhostCoupling {
    pub distribution: SampleDistribution,
    /// Number of atoms drawn (with multiplicity).
    pub m: usize,
    /// `T0² / (2m)`, the total-variation bound between `T0` draws from the
    /// surrogate and `T0` i.i.d. draws from the base law.
    pub tv_bound: f64,
}

/// Draw `m` atoms i.i.d. from `dist` and return the uniform law over them.
///
/// Repeated atoms of a finite-support base are merged with their combined
/// weight, so a single-atom base maps to itself. The model is recomputed from
/// the empirical mean, and its noise bounds from the drawn atoms.
pub fn ghost_couple(dist: &SampleDistribution, m: usize, t0: usize, seed: u64) -> Result<GhostCoupling, StreamError> {
    if m == 0 {
        return Err(StreamError::Empty);
    }
    let k = dist.model().k;
    let mut rng = rng_for(seed, purpose::GHOST);
    let (atoms, weights) = match dist.support() {
        Some((base, _)) => {
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for _ in 0..m {
                let idx = dist.draw_index(&mut rng).expect("finite support");
                *counts.entry(idx).or_default() += 1;
            }
            counts
                .into_iter()
                .map(|(idx, c)| (base[idx].clone(), c as f64 / m as f64))
                .unzip()
        }
        None => {
            let atoms: Vec<_> = (0..m).map(|_| dist.draw(&mut rng).into_owned()).collect();
            (atoms, vec![1.0 / m as f64; m])
        }
    };
    let weights = renormalize(weights);
    let distribution = make_finite_support(atoms, weights, k)?;
    Ok(GhostCoupling {
        distribution,
        m,
        tv_bound: (t0 * t0) as f64 / (2.0 * m as f64),
    })
}

/// Push the rounding residue of `count / m` weights into the largest one.
fn renormalize(mut weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    if let Some(i) = (0..weights.len()).max_by(|&a, &b| weights[a].total_cmp(&weights[b])) {
        weights[i] += 1.0 - total;
    }
    weights
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::streams::make_planted_finite_support;

    #[test]
    fn single_atom_maps_to_itself() {
        let a = DenseMatrix::from_diag(&[1.0, 0.0]);
        let dist = make_finite_support(vec![a.clone()], vec![1.0], 1).unwrap();
        let g = ghost_couple(&dist, 5, 2, 0).unwrap();
        let (atoms, weights) = g.distribution.support().unwrap();
        assert_eq!(atoms, &[a]);
        assert_eq!(weights, &[1.0]);
        assert_eq!(g.tv_bound, 0.4);
    }

    #[test]
    fn empirical_mean_is_atom_average() {
        let base = make_planted_finite_support(&[2.0, 1.0, 0.0], 1, 0.4, 1, 3).unwrap();
        let g = ghost_couple(&base, 4, 2, 17).unwrap();
        let (atoms, weights) = g.distribution.support().unwrap();
        let mut direct = DenseMatrix::zeros(3, 3);
        for (a, w) in atoms.iter().zip(weights) {
            direct.axpy(*w, a);
        }
        assert!(direct.sub(&g.distribution.model().m).max_abs() < 1e-12);
    }
}
