//! Token-level objectives of the deformed-log family and their exact logit
//! gradients.
//!
//! Every objective's target-logit gradient factors as `gate * error`, with
//! `error = 1 - p`. The dynamic kinds ([`ObjectiveKind::CayleyTrans`],
//! [`ObjectiveKind::Deft`], [`ObjectiveKind::EaftStandin`]) compute their
//! focus index or weight from the current state and hold it fixed when
//! differentiating; that frozen form is the update rule itself.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::math::{
    cayley_alpha, concentration, deformed_loss_from_log_prob, log_softmax, shannon_entropy, Dist,
    FocusIndex, Prob,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveKind<T: Scalar = f64> {
    /// `-ln p`.
    Nll,
    /// `1 - p`.
    LinearProb,
    /// `(1 - p^a) / a` with a fixed `a > 0`.
    FixedAlpha(FocusIndex<T>),
    /// Focus index from the Cayley trajectory of the target probability.
    CayleyTrans,
    /// Focus index from the collision probability of the whole prediction.
    Deft,
    /// NLL weighted by normalized Shannon entropy of the prediction. A
    /// baseline stand-in for entropy-aware fine-tuning, not a reproduction.
    EaftStandin,
}

impl<T: Scalar> ObjectiveKind<T> {
    pub fn fixed_alpha(alpha: T) -> Result<Self> {
        if !alpha.is_finite() || alpha <= T::zero() {
            return Err(Error::domain(
                "ObjectiveKind::fixed_alpha",
                format!("alpha = {alpha} must be > 0"),
            ));
        }
        Ok(Self::FixedAlpha(FocusIndex::new(alpha)?))
    }

    /// True when the gate depends on more than the target probability's
    /// closed-form static exponent.
    pub fn is_dynamic(&self) -> bool {
        matches!(self, Self::CayleyTrans | Self::Deft | Self::EaftStandin)
    }

    /// The exponent of a static deformed-log member; `None` for dynamic kinds.
    pub fn static_alpha(&self) -> Option<T> {
        match self {
            Self::Nll => Some(T::zero()),
            Self::LinearProb => Some(T::one()),
            Self::FixedAlpha(a) => Some(a.value()),
            _ => None,
        }
    }

    /// Resolves the state-dependent parts at `dist` and returns the objective
    /// with them held constant.
    pub fn freeze(&self, dist: &Dist<T>, target: usize) -> Result<FrozenObjective<T>> {
        let p = Prob::clamped(dist.get(target)?);
        Ok(match self {
            Self::Nll => FrozenObjective::Deformed(FocusIndex::zero()),
            Self::LinearProb => FrozenObjective::Deformed(FocusIndex::one()),
            Self::FixedAlpha(a) => FrozenObjective::Deformed(*a),
            Self::CayleyTrans => FrozenObjective::Deformed(cayley_alpha(p.get())?),
            Self::Deft => FrozenObjective::Deformed(concentration(dist)),
            Self::EaftStandin => FrozenObjective::WeightedNll(entropy_weight(dist)),
        })
    }
}

impl<T: Scalar> fmt::Display for ObjectiveKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Nll => f.write_str("nll"),
            Self::LinearProb => f.write_str("linear"),
            Self::FixedAlpha(a) => write!(f, "alpha:{}", a.value()),
            Self::CayleyTrans => f.write_str("cayley"),
            Self::Deft => f.write_str("deft"),
            Self::EaftStandin => f.write_str("eaft"),
        }
    }
}

impl<T: Scalar> FromStr for ObjectiveKind<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "nll" => Ok(Self::Nll),
            "linear" => Ok(Self::LinearProb),
            "cayley" => Ok(Self::CayleyTrans),
            "deft" => Ok(Self::Deft),
            "eaft" => Ok(Self::EaftStandin),
            _ => {
                let raw = s.strip_prefix("alpha:").ok_or_else(|| Error::Config {
                    field: "objective",
                    detail: format!(
                        "unknown objective `{s}` (expected nll, linear, alpha:<float>, cayley, deft or eaft)"
                    ),
                })?;
                let alpha: f64 = raw.parse().map_err(|_| Error::Config {
                    field: "objective",
                    detail: format!("`{raw}` is not a number"),
                })?;
                Self::fixed_alpha(T::lit(alpha)).map_err(|e| Error::Config {
                    field: "objective",
                    detail: e.to_string(),
                })
            }
        }
    }
}

impl<T: Scalar> Serialize for ObjectiveKind<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for ObjectiveKind<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An objective whose focus index (or weight) has been fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrozenObjective<T: Scalar = f64> {
    Deformed(FocusIndex<T>),
    WeightedNll(T),
}

impl<T: Scalar> FrozenObjective<T> {
    pub fn focus_index(&self) -> FocusIndex<T> {
        match self {
            Self::Deformed(a) => *a,
            Self::WeightedNll(_) => FocusIndex::zero(),
        }
    }

    pub fn loss_from_log_prob(&self, log_p: T) -> T {
        match self {
            Self::Deformed(a) => deformed_loss_from_log_prob(log_p, *a),
            Self::WeightedNll(w) => *w * deformed_loss_from_log_prob(log_p, FocusIndex::zero()),
        }
    }

    pub fn loss(&self, p: Prob<T>) -> T {
        self.loss_from_log_prob(p.get().ln())
    }

    /// Trust gate `-f'(p) p`.
    pub fn gate(&self, p: Prob<T>) -> T {
        match self {
            Self::Deformed(a) => {
                let a = a.value();
                if a == T::zero() {
                    T::one()
                } else if a == T::one() {
                    p.get()
                } else {
                    p.get().powf(a)
                }
            }
            Self::WeightedNll(w) => *w,
        }
    }

    /// `f'(p)`.
    pub fn derivative(&self, p: Prob<T>) -> T {
        -self.gate(p) / p.get()
    }
}

/// Gate, error `1 - p` and their product, the target-logit signal magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateError<T: Scalar = f64> {
    pub gate: T,
    pub error: T,
    pub signal: T,
}

/// A finite logit vector over a vocabulary of at least two tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct Logits<T: Scalar = f64>(Vec<T>);

impl<T: Scalar> Logits<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "vocabulary size {} < 2",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("logits"));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn softmax(&self) -> Dist<T> {
        Dist::softmax(&self.0).expect("validated logits")
    }
}

/// Normalized Shannon entropy `H(P) / ln |V|` in `[0, 1]`.
pub fn entropy_weight<T: Scalar>(dist: &Dist<T>) -> T {
    let max = T::from_count(dist.len()).ln();
    (shannon_entropy(dist) / max).max(T::zero()).min(T::one())
}

fn check_target<T: Scalar>(dist: &Dist<T>, target: usize) -> Result<()> {
    if target >= dist.len() {
        return Err(Error::TargetOutOfRange {
            target,
            vocab: dist.len(),
        });
    }
    Ok(())
}

pub fn focus_index<T: Scalar>(
    kind: &ObjectiveKind<T>,
    dist: &Dist<T>,
    target: usize,
) -> Result<FocusIndex<T>> {
    check_target(dist, target)?;
    Ok(kind.freeze(dist, target)?.focus_index())
}

pub fn gate<T: Scalar>(kind: &ObjectiveKind<T>, dist: &Dist<T>, target: usize) -> Result<GateError<T>> {
    check_target(dist, target)?;
    let frozen = kind.freeze(dist, target)?;
    let p = Prob::clamped(dist.get(target)?);
    let gate = frozen.gate(p);
    let error = T::one() - p.get();
    Ok(GateError {
        gate,
        error,
        signal: gate * error,
    })
}

/// Token loss; dynamic kinds are reported with their focus index frozen at
/// the current state.
pub fn loss<T: Scalar>(kind: &ObjectiveKind<T>, dist: &Dist<T>, target: usize) -> Result<T> {
    check_target(dist, target)?;
    let p = Prob::clamped(dist.get(target)?);
    Ok(kind.freeze(dist, target)?.loss(p))
}

/// Loss evaluated through a log-softmax of `logits` with the objective
/// frozen as given.
pub fn frozen_loss_at_logits<T: Scalar>(
    frozen: &FrozenObjective<T>,
    logits: &[T],
    target: usize,
) -> Result<T> {
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logits"));
    }
    let lp = *log_softmax(logits).get(target).ok_or(Error::TargetOutOfRange {
        target,
        vocab: logits.len(),
    })?;
    Ok(frozen.loss_from_log_prob(lp))
}

/// `g_i = gate * (P_i - [i == target])` with `P = softmax(z)`.
pub fn logit_gradient<T: Scalar>(
    kind: &ObjectiveKind<T>,
    logits: &Logits<T>,
    target: usize,
) -> Result<Vec<T>> {
    let dist = logits.softmax();
    let g = gate(kind, &dist, target)?.gate;
    Ok(dist
        .probs()
        .iter()
        .enumerate()
        .map(|(i, &p)| if i == target { g * (p - T::one()) } else { g * p })
        .collect())
}
