//! Scalar and vector functions of the deformed-log family: q-logarithms,
//! generalized entropies, focus trajectories and Bernoulli Fisher-Rao geometry.
//!
//! Everything here is a pure function of its arguments and generic over
//! [`Scalar`](crate::Scalar).

mod deformed;
mod entropy;
mod focus;
mod geometry;
mod types;

pub use deformed::{deformed_loss, deformed_loss_from_log_prob, q_log};
pub use entropy::{concentration, renyi2_entropy, shannon_entropy, tsallis_entropy};
pub use focus::{cayley_alpha, error_surprisal, mobius_alpha, surprisal_alpha};
pub use geometry::{fisher_rao_distance, radius_from_distance};
pub use types::{log_softmax, Dist, FocusIndex, Prob, UncertaintyRadius};

/// Probabilities are clamped to `[PROB_FLOOR, 1]` before any log or power.
pub const PROB_FLOOR: f64 = 1e-12;

/// Below this focus index the deformed loss is evaluated as its NLL limit.
pub const NLL_SWITCH_ALPHA: f64 = 1e-6;

/// `|1 - q|` (or `|q - 1|`) below which q-log and Tsallis entropy take their
/// logarithmic / Shannon limits.
pub const Q_LIMIT_EPS: f64 = 1e-9;

/// Allowed deviation of a distribution's total mass from one.
pub const DIST_SUM_TOL: f64 = 1e-9;
