use serde::{Deserialize, Serialize};

use super::{
    make_bounded_noise_model, make_finite_support, make_planted_finite_support, SampleDistribution, StreamError,
};
use crate::linalg::DenseMatrix;

/// Mean spectrum, either listed explicitly or generated for a given `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EigenvalueSpec {
    Explicit(Vec<f64>),
    /// `top` followed by `d − top.len()` values spaced linearly from
    /// `tail_from` down to `tail_to`.
    Generated {
        top: Vec<f64>,
        tail_from: f64,
        tail_to: f64,
    },
}

impl EigenvalueSpec {
    pub fn resolve(&self, d: Option<usize>) -> Result<Vec<f64>, StreamError> {
        match self {
            Self::Explicit(values) => match d {
                Some(d) if d != values.len() => Err(StreamError::DimensionMismatch {
                    index: 0,
                    expected: d,
                    found: (values.len(), 1),
                }),
                _ => Ok(values.clone()),
            },
            Self::Generated {
                top,
                tail_from,
                tail_to,
            } => {
                let d = d.ok_or(StreamError::MissingDimension)?;
                if d <= top.len() {
                    return Err(StreamError::InvalidK { k: top.len(), d });
                }
                let n = d - top.len();
                let mut values = top.clone();
                values.extend((0..n).map(|i| {
                    if n == 1 {
                        *tail_from
                    } else {
                        tail_from + (tail_to - tail_from) * i as f64 / (n - 1) as f64
                    }
                }));
                Ok(values)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSupportSpec {
    pub atoms: Vec<DenseMatrix>,
    /// Uniform when omitted.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundedNoiseSpec {
    #[serde(default)]
    pub d: Option<usize>,
    pub eigenvalues: EigenvalueSpec,
    pub k: usize,
    pub noise_scale: f64,
    /// Defaults to `d`.
    #[serde(default)]
    pub noise_rank: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedSpec {
    #[serde(default)]
    pub d: Option<usize>,
    pub eigenvalues: EigenvalueSpec,
    pub k: usize,
    pub noise_scale: f64,
    pub pairs: usize,
    #[serde(default)]
    pub seed: u64,
}

/// JSON description of a sample distribution, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    FiniteSupport(FiniteSupportSpec),
    BoundedNoise(BoundedNoiseSpec),
    Planted(PlantedSpec),
}

impl DistributionSpec {
    pub fn build(&self) -> Result<SampleDistribution, StreamError> {
        match self {
            Self::FiniteSupport(s) => {
                let n = s.atoms.len();
                let weights = s.weights.clone().unwrap_or_else(|| vec![1.0 / n.max(1) as f64; n]);
                make_finite_support(s.atoms.clone(), weights, s.k)
            }
            Self::BoundedNoise(s) => {
                let eigs = s.eigenvalues.resolve(s.d)?;
                let d = eigs.len();
                make_bounded_noise_model(&eigs, s.k, s.noise_scale, s.noise_rank.unwrap_or(d), d, s.seed)
            }
            Self::Planted(s) => {
                let eigs = s.eigenvalues.resolve(s.d)?;
                make_planted_finite_support(&eigs, s.k, s.noise_scale, s.pairs, s.seed)
            }
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Self::FiniteSupport(s) => s.k,
            Self::BoundedNoise(s) => s.k,
            Self::Planted(s) => s.k,
        }
    }

    pub fn set_k(&mut self, k: usize) {
        match self {
            Self::FiniteSupport(s) => s.k = k,
            Self::BoundedNoise(s) => s.k = k,
            Self::Planted(s) => s.k = k,
        }
    }

    /// Change the dimension; only generated spectra can be resized.
    pub fn set_dim(&mut self, d: usize) -> Result<(), StreamError> {
        let (slot, eigs) = match self {
            Self::FiniteSupport(_) => return Err(StreamError::Unsupported("resize explicit atoms")),
            Self::BoundedNoise(s) => (&mut s.d, &s.eigenvalues),
            Self::Planted(s) => (&mut s.d, &s.eigenvalues),
        };
        if let EigenvalueSpec::Explicit(_) = eigs {
            return Err(StreamError::Unsupported("resize an explicit eigenvalue list"));
        }
        *slot = Some(d);
        Ok(())
    }

    pub fn set_noise_scale(&mut self, scale: f64) -> Result<(), StreamError> {
        match self {
            Self::FiniteSupport(_) => Err(StreamError::Unsupported("rescale explicit atoms")),
            Self::BoundedNoise(s) => {
                s.noise_scale = scale;
                Ok(())
            }
            Self::Planted(s) => {
                s.noise_scale = scale;
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_kinds() {
        let fs: DistributionSpec =
            serde_json::from_str(r#"{"kind":"finite_support","atoms":[[[2,0],[0,1]]],"k":1}"#).unwrap();
        assert_eq!(fs.build().unwrap().model().rho_k, 1.0);
        let bn: DistributionSpec = serde_json::from_str(
            r#"{"kind":"bounded_noise","eigenvalues":[2,1,0],"k":1,"noise_scale":0.5,"noise_rank":2,"seed":3}"#,
        )
        .unwrap();
        assert!(bn.build().is_ok());
        let pl: DistributionSpec = serde_json::from_str(
            r#"{"kind":"planted","d":6,"eigenvalues":{"top":[2,1.5],"tail_from":0.5,"tail_to":0},"k":2,"noise_scale":1,"pairs":2}"#,
        )
        .unwrap();
        let dist = pl.build().unwrap();
        assert_eq!(dist.dim(), 6);
        assert!((dist.model().rho_k - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r: Result<DistributionSpec, _> =
            serde_json::from_str(r#"{"kind":"finite_support","atoms":[[[1]]],"k":1,"extra":1}"#);
        assert!(r.is_err());
    }

    #[test]
    fn generated_tail_is_linear() {
        let spec = EigenvalueSpec::Generated {
            top: vec![3.0],
            tail_from: 1.0,
            tail_to: 0.0,
        };
        assert_eq!(spec.resolve(Some(4)).unwrap(), vec![3.0, 1.0, 0.5, 0.0]);
        assert!(spec.resolve(None).is_err());
    }
}
