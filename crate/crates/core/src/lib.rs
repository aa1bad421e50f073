//! Deformed-log token objectives for supervised fine-tuning.
//!
//! The numerical core ([`math`], [`objectives`], [`landscape`]) is generic
//! over [`Scalar`] (`f32` or `f64`); the experiment harness
//! ([`verification`], [`trainer`], [`export`]) runs in `f64`. The aliases
//! below name the common concrete instantiations.

pub mod error;
pub mod export;
pub mod landscape;
pub mod math;
pub mod objectives;
pub(crate) mod sampling;
pub mod scalar;
pub mod trainer;
pub mod verification;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Dist64 = math::Dist<f64>;
pub type Dist32 = math::Dist<f32>;
pub type Prob64 = math::Prob<f64>;
pub type Prob32 = math::Prob<f32>;
pub type FocusIndex64 = math::FocusIndex<f64>;
pub type FocusIndex32 = math::FocusIndex<f32>;
pub type Logits64 = objectives::Logits<f64>;
pub type Logits32 = objectives::Logits<f32>;
pub type Objective64 = objectives::ObjectiveKind<f64>;
pub type Objective32 = objectives::ObjectiveKind<f32>;
