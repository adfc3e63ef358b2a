use std::borrow::Cow;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::{SpectralModel, StreamError};
use crate::linalg::{gram_schmidt_qr, ky_fan_2k_norm, spectral_norm, symmetric_eigendecompose, tol, DenseMatrix};
use crate::rng::{purpose, rng_for};

/// Tolerance on the weight sum of a finite-support distribution.
pub const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
enum Sampler {
    FiniteSupport {
        atoms: Vec<DenseMatrix>,
        weights: Vec<f64>,
        cumulative: Vec<f64>,
    },
    BoundedNoise {
        noise_scale: f64,
        noise_rank: usize,
    },
}

/// A law on symmetric d×d matrices with known mean and bounded fluctuation.
///
/// Either a finite list of atoms with weights, or the parametric rule
/// `A = M + E` where `E` is a seeded random low-rank symmetric perturbation
/// clipped to Ky Fan (2, k) norm at most `noise_scale` and symmetrized by a
/// random sign.
#[derive(Debug, Clone)]
pub struct SampleDistribution {
    model: SpectralModel,
    sampler: Sampler,
}

impl SampleDistribution {
    pub fn model(&self) -> &SpectralModel {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn is_finite_support(&self) -> bool {
        matches!(self.sampler, Sampler::FiniteSupport { .. })
    }

    /// Atoms and weights of a finite-support law.
    pub fn support(&self) -> Option<(&[DenseMatrix], &[f64])> {
        match &self.sampler {
            Sampler::FiniteSupport { atoms, weights, .. } => Some((atoms, weights)),
            Sampler::BoundedNoise { .. } => None,
        }
    }

    /// Draw one sample. Finite-support atoms are borrowed.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Cow<'_, DenseMatrix> {
        match &self.sampler {
            Sampler::FiniteSupport { atoms, cumulative, .. } => Cow::Borrowed(&atoms[pick(cumulative, rng)]),
            Sampler::BoundedNoise {
                noise_scale,
                noise_rank,
            } => {
                let mut a = bounded_noise(self.dim(), self.model.k, *noise_scale, *noise_rank, rng);
                a.axpy(1.0, &self.model.m);
                Cow::Owned(a)
            }
        }
    }

    /// Atom index of a finite-support draw (consumes the same randomness as
    /// [`draw`](Self::draw)).
    pub fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        match &self.sampler {
            Sampler::FiniteSupport { cumulative, .. } => Some(pick(cumulative, rng)),
            Sampler::BoundedNoise { .. } => None,
        }
    }

    pub fn stream(&self, seed: u64) -> StreamHandle<'_> {
        StreamHandle {
            dist: self,
            rng: rng_for(seed, purpose::SAMPLES),
            seed,
            drawn: 0,
        }
    }
}

fn pick<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

/// Sequential cursor over a distribution. Equal `(distribution, seed)`
/// pairs give bitwise-equal sequences.
#[derive(Debug, Clone)]
pub struct StreamHandle<'a> {
    dist: &'a SampleDistribution,
    rng: ChaCha20Rng,
    seed: u64,
    drawn: u64,
}

impl<'a> StreamHandle<'a> {
    pub fn next_sample(&mut self) -> Cow<'a, DenseMatrix> {
        self.drawn += 1;
        self.dist.draw(&mut self.rng)
    }

    pub fn distribution(&self) -> &'a SampleDistribution {
        self.dist
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn drawn(&self) -> u64 {
        self.drawn
    }
}

/// Finite-support law over `atoms` with the given `weights`.
pub fn make_finite_support(
    atoms: Vec<DenseMatrix>,
    weights: Vec<f64>,
    k: usize,
) -> Result<SampleDistribution, StreamError> {
    if atoms.is_empty() {
        return Err(StreamError::Empty);
    }
    if weights.len() != atoms.len() {
        return Err(StreamError::BadWeights(format!(
            "{} weights for {} atoms",
            weights.len(),
            atoms.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(StreamError::BadWeights("weights must be finite and nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(StreamError::BadWeights(format!("weights sum to {total}")));
    }
    let d = atoms[0].rows();
    for (index, a) in atoms.iter().enumerate() {
        if a.shape() != (d, d) {
            return Err(StreamError::DimensionMismatch {
                index,
                expected: d,
                found: a.shape(),
            });
        }
        let defect = a.symmetry_defect();
        if defect > tol::SYM * a.frobenius_norm().max(f64::MIN_POSITIVE) {
            return Err(StreamError::NotSymmetric { index, defect });
        }
    }

    let mut m = DenseMatrix::zeros(d, d);
    for (a, &w) in atoms.iter().zip(&weights) {
        m.axpy(w, a);
    }
    let m = m.symmetrized();
    let mut noise_bound: f64 = 0.0;
    let mut noise_spectral: f64 = 0.0;
    if k >= 1 && k < d {
        for (a, &w) in atoms.iter().zip(&weights) {
            if w > 0.0 {
                let e = a.sub(&m);
                noise_bound = noise_bound.max(ky_fan_2k_norm(&e, k)?);
                noise_spectral = noise_spectral.max(spectral_norm(&e));
            }
        }
    }
    let model = SpectralModel::from_mean(m, k, noise_bound, noise_spectral)?;
    let mut acc = 0.0;
    let cumulative = weights
        .iter()
        .map(|w| {
            acc += w / total;
            acc
        })
        .collect();
    Ok(SampleDistribution {
        model,
        sampler: Sampler::FiniteSupport {
            atoms,
            weights,
            cumulative,
        },
    })
}

/// Parametric law `A = M + E` with `M = QΛQᵀ` for a seeded random orthogonal Q.
///
/// `E = s·c·G diag(g) Gᵀ / d` with `G` a d×r Gaussian factor, `g` Gaussian,
/// `c = noise_scale`, clipped so its Ky Fan (2, k) norm never exceeds
/// `noise_scale`, and `s = ±1` drawn last so the law of `E` is symmetric.
pub fn make_bounded_noise_model(
    eigenvalues: &[f64],
    k: usize,
    noise_scale: f64,
    noise_rank: usize,
    d: usize,
    seed: u64,
) -> Result<SampleDistribution, StreamError> {
    if eigenvalues.len() != d {
        return Err(StreamError::DimensionMismatch {
            index: 0,
            expected: d,
            found: (eigenvalues.len(), 1),
        });
    }
    if noise_rank > d {
        return Err(StreamError::InvalidRank { rank: noise_rank, d });
    }
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(StreamError::InvalidNoise(noise_scale));
    }
    let m = rotated_diagonal(eigenvalues, seed)?;
    let model = SpectralModel::from_mean(m, k, noise_scale, noise_scale)?;
    Ok(SampleDistribution {
        model,
        sampler: Sampler::BoundedNoise {
            noise_scale,
            noise_rank,
        },
    })
}

/// Finite support `{M ± E_j}` with equal weights, each `E_j` a random
/// symmetric Gaussian matrix rescaled to Ky Fan (2, k) norm `noise_scale`.
pub fn make_planted_finite_support(
    eigenvalues: &[f64],
    k: usize,
    noise_scale: f64,
    pairs: usize,
    seed: u64,
) -> Result<SampleDistribution, StreamError> {
    if pairs == 0 {
        return Err(StreamError::Empty);
    }
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(StreamError::InvalidNoise(noise_scale));
    }
    let d = eigenvalues.len();
    if k == 0 || k >= d {
        return Err(StreamError::InvalidK { k, d });
    }
    let m = rotated_diagonal(eigenvalues, seed)?;
    let mut rng = rng_for(seed, purpose::GHOST);
    let mut atoms = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        let g = gaussian_matrix(d, d, &mut rng);
        let mut e = g.add(&g.transpose());
        let norm = ky_fan_2k_norm(&e, k)?;
        e.scale_in_place(if norm > 0.0 { noise_scale / norm } else { 0.0 });
        atoms.push(m.add(&e));
        atoms.push(m.sub(&e));
    }
    let w = 1.0 / atoms.len() as f64;
    let weights = vec![w; atoms.len()];
    make_finite_support(atoms, weights, k)
}

/// `QΛQᵀ` for a seeded Haar-like orthogonal `Q`.
fn rotated_diagonal(eigenvalues: &[f64], seed: u64) -> Result<DenseMatrix, StreamError> {
    if eigenvalues.windows(2).any(|w| w[0] < w[1]) || eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(StreamError::InvalidEigenvalues);
    }
    let d = eigenvalues.len();
    let mut rng = rng_for(seed, purpose::MODEL);
    let q = loop {
        if let Ok(q) = gram_schmidt_qr(&gaussian_matrix(d, d, &mut rng)) {
            break q;
        }
    };
    let scaled = DenseMatrix::from_fn(d, d, |i, j| q[(i, j)] * eigenvalues[j]);
    Ok(scaled.matmul_t(&q).symmetrized())
}

pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn bounded_noise<R: Rng + ?Sized>(d: usize, k: usize, scale: f64, rank: usize, rng: &mut R) -> DenseMatrix {
    if scale == 0.0 || rank == 0 {
        return DenseMatrix::zeros(d, d);
    }
    let g = gaussian_matrix(d, rank, rng);
    let diag: Vec<f64> = (0..rank).map(|_| rng.sample(StandardNormal)).collect();
    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let gd = DenseMatrix::from_fn(d, rank, |i, j| g[(i, j)] * diag[j]);
    let mut e = gd.matmul_t(&g);
    e.scale_in_place(scale / d as f64);
    let e = e.symmetrized();
    let norm = low_rank_ky_fan(&g, &diag, scale / d as f64, k)
        .unwrap_or_else(|| ky_fan_2k_norm(&e, k.min(d)).unwrap_or(f64::INFINITY));
    let clip = if norm > scale { scale / norm } else { 1.0 };
    e.scale(sign * clip)
}

/// Ky Fan (2, k) norm of `c·G diag(g) Gᵀ` through the r×r core `c·R diag(g) Rᵀ`.
fn low_rank_ky_fan(g: &DenseMatrix, diag: &[f64], c: f64, k: usize) -> Option<f64> {
    let q = gram_schmidt_qr(g).ok()?;
    let r = q.t_matmul(g);
    let rd = DenseMatrix::from_fn(r.rows(), r.cols(), |i, j| r[(i, j)] * diag[j]);
    let core = rd.matmul_t(&r).scale(c).symmetrized();
    let eig = symmetric_eigendecompose(&core).ok()?;
    let mut mags: Vec<f64> = eig.eigenvalues.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    Some(mags.iter().take(k).map(|v| v * v).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom_is_deterministic() {
        let a = DenseMatrix::from_diag(&[2.0, 1.0, 0.0]);
        let dist = make_finite_support(vec![a.clone()], vec![1.0], 1).unwrap();
        assert_eq!(dist.model().m, a);
        assert_eq!(dist.model().noise_bound, 0.0);
        let mut s = dist.stream(3);
        assert_eq!(*s.next_sample(), a);
    }

    #[test]
    fn symmetric_pair_has_mean_m() {
        let m = DenseMatrix::from_diag(&[3.0, 1.0, 0.0]);
        let e = DenseMatrix::from_rows(&[vec![0.0, 1.0, 0.5], vec![1.0, 0.2, 0.0], vec![0.5, 0.0, -0.3]]).unwrap();
        let dist = make_finite_support(vec![m.add(&e), m.sub(&e)], vec![0.5, 0.5], 2).unwrap();
        assert!(dist.model().m.sub(&m).max_abs() < 1e-15);
        let expected = ky_fan_2k_norm(&e, 2).unwrap();
        assert!((dist.model().noise_bound - expected).abs() < 1e-14);
    }

    #[test]
    fn construction_errors() {
        let a = DenseMatrix::identity(2);
        assert!(matches!(
            make_finite_support(vec![a.clone()], vec![0.5], 1),
            Err(StreamError::BadWeights(_))
        ));
        let skew = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            make_finite_support(vec![skew], vec![1.0], 1),
            Err(StreamError::NotSymmetric { index: 0, .. })
        ));
        assert!(matches!(
            make_finite_support(vec![a.clone(), DenseMatrix::identity(3)], vec![0.5, 0.5], 1),
            Err(StreamError::DimensionMismatch { index: 1, .. })
        ));
        assert!(matches!(
            make_finite_support(vec![a], vec![1.0], 1),
            Err(StreamError::ZeroGap { .. })
        ));
    }

    #[test]
    fn zero_noise_stream_equals_mean() {
        let dist = make_bounded_noise_model(&[2.0, 1.0, 0.0, 0.0], 1, 0.0, 4, 4, 9).unwrap();
        let mut s = dist.stream(1);
        for _ in 0..5 {
            assert_eq!(*s.next_sample(), dist.model().m);
        }
    }

    #[test]
    fn bounded_noise_respects_bound() {
        let dist = make_bounded_noise_model(&[3.0, 2.0, 1.0, 0.5, 0.0], 2, 0.5, 3, 5, 4).unwrap();
        let mut s = dist.stream(2);
        for _ in 0..2000 {
            let e = s.next_sample().sub(&dist.model().m);
            assert!(ky_fan_2k_norm(&e, 2).unwrap() <= 0.5 + 1e-12);
            assert_eq!(e.symmetry_defect(), 0.0);
        }
    }

    #[test]
    fn rank_above_dimension_is_rejected() {
        assert!(matches!(
            make_bounded_noise_model(&[1.0, 0.0], 1, 1.0, 3, 2, 0),
            Err(StreamError::InvalidRank { .. })
        ));
    }
}
