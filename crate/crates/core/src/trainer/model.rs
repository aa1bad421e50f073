use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::math::Dist;

/// How contexts are embedded before the linear readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMap {
    /// One indicator feature per context: the model is a free logit table
    /// and contexts never share parameters.
    OneHot,
    /// Unit-norm Gaussian features of the given dimension, shared readout.
    Gaussian { dim: usize },
}

impl Default for FeatureMap {
    fn default() -> Self {
        FeatureMap::Gaussian { dim: 16 }
    }
}

impl fmt::Display for FeatureMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureMap::OneHot => f.write_str("one_hot"),
            FeatureMap::Gaussian { dim } => write!(f, "gaussian:{dim}"),
        }
    }
}

impl FromStr for FeatureMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |detail: String| Error::Config {
            field: "features",
            detail,
        };
        match s.trim() {
            "one_hot" | "table" => Ok(FeatureMap::OneHot),
            other => {
                let dim = other
                    .strip_prefix("gaussian:")
                    .ok_or_else(|| bad(format!("expected `one_hot` or `gaussian:<dim>`, got `{other}`")))?;
                let dim: usize = dim.parse().map_err(|_| bad(format!("bad dimension `{dim}`")))?;
                if dim == 0 {
                    return Err(bad("dimension must be positive".into()));
                }
                Ok(FeatureMap::Gaussian { dim })
            }
        }
    }
}

impl Serialize for FeatureMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FeatureMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Softmax regression `logits(c) = W phi(c)` over a finite context set.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel {
    vocab: usize,
    num_contexts: usize,
    features: FeatureMap,
    /// `num_contexts x dim` row-major; empty for [`FeatureMap::OneHot`].
    phi: Vec<f64>,
    /// `vocab x dim` row-major, or the `num_contexts x vocab` table for
    /// [`FeatureMap::OneHot`].
    weights: Vec<f64>,
}

impl ToyModel {
    /// Weights drawn as `scale * N(0, 1)`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        vocab: usize,
        num_contexts: usize,
        features: FeatureMap,
        scale: f64,
    ) -> Self {
        let mut normal = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|_| Distribution::<f64>::sample(&StandardNormal, rng))
                .collect()
        };
        let (phi, weights) = match features {
            FeatureMap::OneHot => (Vec::new(), normal(num_contexts * vocab)),
            FeatureMap::Gaussian { dim } => {
                let mut phi = normal(num_contexts * dim);
                for row in phi.chunks_mut(dim) {
                    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                    row.iter_mut().for_each(|v| *v /= norm);
                }
                (phi, normal(vocab * dim))
            }
        };
        Self {
            vocab,
            num_contexts,
            features,
            phi,
            weights: weights.into_iter().map(|w| scale * w).collect(),
        }
    }

    /// Same contexts, readout redrawn as `scale * N(0, 1)`.
    pub fn with_fresh_weights<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> Self {
        let weights = (0..self.weights.len())
            .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, rng))
            .collect();
        Self {
            weights,
            ..self.clone()
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab
    }

    pub fn num_contexts(&self) -> usize {
        self.num_contexts
    }

    pub fn features(&self) -> FeatureMap {
        self.features
    }

    fn dim(&self) -> usize {
        match self.features {
            FeatureMap::OneHot => self.num_contexts,
            FeatureMap::Gaussian { dim } => dim,
        }
    }

    pub fn logits(&self, context: usize) -> Vec<f64> {
        match self.features {
            FeatureMap::OneHot => self.weights[context * self.vocab..(context + 1) * self.vocab].to_vec(),
            FeatureMap::Gaussian { dim } => {
                let phi = &self.phi[context * dim..(context + 1) * dim];
                self.weights
                    .chunks(dim)
                    .map(|w| w.iter().zip(phi).map(|(a, b)| a * b).sum())
                    .collect()
            }
        }
    }

    pub fn dist(&self, context: usize) -> Result<Dist> {
        Dist::softmax(&self.logits(context))
    }

    /// The full `num_contexts x vocab` matrix of logits.
    pub fn logit_table(&self) -> Vec<Vec<f64>> {
        (0..self.num_contexts).map(|c| self.logits(c)).collect()
    }

    /// Gradient step from per-context logit gradients. The step is scaled by
    /// `dim / batch` so that one full-batch step on the one-hot table moves
    /// each row by exactly `lr` times its own gradient.
    pub(crate) fn apply(&mut self, grads: &[(usize, Vec<f64>)], lr: f64) {
        if grads.is_empty() {
            return;
        }
        let scale = lr * self.dim() as f64 / grads.len() as f64;
        match self.features {
            FeatureMap::OneHot => {
                for (c, g) in grads {
                    let row = &mut self.weights[c * self.vocab..(c + 1) * self.vocab];
                    row.iter_mut().zip(g).for_each(|(w, gi)| *w -= scale * gi);
                }
            }
            FeatureMap::Gaussian { dim } => {
                for (c, g) in grads {
                    let phi = &self.phi[c * dim..(c + 1) * dim];
                    for (row, gi) in self.weights.chunks_mut(dim).zip(g) {
                        row.iter_mut().zip(phi).for_each(|(w, f)| *w -= scale * gi * f);
                    }
                }
            }
        }
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.is_finite())
    }
}
