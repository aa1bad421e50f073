use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{DIST_SUM_TOL, PROB_FLOOR};

/// Target-token probability, clamped into `[PROB_FLOOR, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Prob<T: Scalar = f64>(T);

impl<T: Scalar> Prob<T> {
    /// Accepts any value in `[0, 1]`; zero is lifted to the floor.
    pub fn new(value: T) -> Result<Self> {
        if !value.is_finite() || value < T::zero() || value > T::one() {
            return Err(Error::domain("Prob::new", format!("{value} not in [0, 1]")));
        }
        Ok(Self::clamped(value))
    }

    /// Clamps without validation; NaN maps to the floor.
    pub fn clamped(value: T) -> Self {
        let floor = T::lit(PROB_FLOOR);
        if value.is_nan() {
            return Self(floor);
        }
        Self(value.max(floor).min(T::one()))
    }

    #[inline]
    pub fn get(self) -> T {
        self.0
    }
}

/// Focus index `alpha >= 0` of the deformed loss.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct FocusIndex<T: Scalar = f64>(T);

impl<T: Scalar> FocusIndex<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if !alpha.is_finite() || alpha < T::zero() {
            return Err(Error::domain(
                "FocusIndex::new",
                format!("alpha = {alpha} must be finite and >= 0"),
            ));
        }
        Ok(Self(alpha))
    }

    pub(crate) fn new_unchecked(alpha: T) -> Self {
        Self(alpha)
    }

    pub fn zero() -> Self {
        Self(T::zero())
    }

    pub fn one() -> Self {
        Self(T::one())
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }
}

/// Fisher-Rao uncertainty radius `z = sqrt(1 - p)` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct UncertaintyRadius<T: Scalar = f64>(T);

impl<T: Scalar> UncertaintyRadius<T> {
    pub fn new(z: T) -> Result<Self> {
        if !z.is_finite() || z < T::zero() || z > T::one() {
            return Err(Error::domain(
                "UncertaintyRadius::new",
                format!("z = {z} not in [0, 1]"),
            ));
        }
        Ok(Self(z))
    }

    /// `z = sqrt(1 - p)` for a raw probability in `[0, 1]`.
    pub fn from_prob(p: T) -> Result<Self> {
        if !p.is_finite() || p < T::zero() || p > T::one() {
            return Err(Error::domain(
                "UncertaintyRadius::from_prob",
                format!("p = {p} not in [0, 1]"),
            ));
        }
        Ok(Self((T::one() - p).sqrt()))
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }
}

/// A probability vector over a vocabulary of at least two tokens.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Dist<T: Scalar = f64> {
    probs: Vec<T>,
}

impl<T: Scalar> Dist<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "vocabulary size {} < 2",
                probs.len()
            )));
        }
        if let Some((i, v)) = probs
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < T::zero())
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} = {v} is negative or non-finite"
            )));
        }
        let total: T = probs.iter().copied().sum();
        let tol = T::lit(DIST_SUM_TOL)
            .max(T::lit(16.0) * T::epsilon() * T::from_count(probs.len()));
        if (total - T::one()).abs() > tol {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(vocab: usize) -> Result<Self> {
        if vocab < 2 {
            return Err(Error::InvalidDistribution(format!("vocabulary size {vocab} < 2")));
        }
        Ok(Self {
            probs: vec![T::one() / T::from_count(vocab); vocab],
        })
    }

    pub fn one_hot(vocab: usize, index: usize) -> Result<Self> {
        if vocab < 2 {
            return Err(Error::InvalidDistribution(format!("vocabulary size {vocab} < 2")));
        }
        if index >= vocab {
            return Err(Error::TargetOutOfRange {
                target: index,
                vocab,
            });
        }
        let mut probs = vec![T::zero(); vocab];
        probs[index] = T::one();
        Ok(Self { probs })
    }

    /// Numerically stable softmax of a logit vector.
    pub fn softmax(logits: &[T]) -> Result<Self> {
        if logits.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "vocabulary size {} < 2",
                logits.len()
            )));
        }
        if logits.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite("logits"));
        }
        let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
        let mut probs: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
        let total: T = probs.iter().copied().sum();
        probs.iter_mut().for_each(|p| *p = *p / total);
        Ok(Self { probs })
    }

    #[inline]
    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, index: usize) -> Result<T> {
        self.probs
            .get(index)
            .copied()
            .ok_or(Error::TargetOutOfRange {
                target: index,
                vocab: self.probs.len(),
            })
    }

    /// Index and mass of the most probable token (lowest index on ties).
    pub fn argmax(&self) -> (usize, T) {
        self.probs
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, v)| if v > best.1 { (i, v) } else { best })
    }

    pub fn into_vec(self) -> Vec<T> {
        self.probs
    }
}

/// `log softmax(z)`, stable for large logit gaps.
pub fn log_softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<T>().ln();
    logits.iter().map(|&z| z - lse).collect()
}
