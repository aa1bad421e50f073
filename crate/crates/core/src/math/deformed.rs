use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::types::{FocusIndex, Prob};
use super::{NLL_SWITCH_ALPHA, PROB_FLOOR, Q_LIMIT_EPS};

/// Tsallis q-logarithm `(x^(1-q) - 1) / (1 - q)`, with `ln x` as the `q -> 1` limit.
pub fn q_log<T: Scalar>(x: T, q: T) -> Result<T> {
    if !x.is_finite() || x <= T::zero() {
        return Err(Error::domain("q_log", format!("x = {x} must be positive")));
    }
    if !q.is_finite() {
        return Err(Error::domain("q_log", format!("q = {q} must be finite")));
    }
    let k = T::one() - q;
    if k.abs() < T::lit(Q_LIMIT_EPS) {
        return Ok(x.ln());
    }
    Ok((k * x.ln()).exp_m1() / k)
}

/// Token loss `(1 - p^alpha) / alpha`; `-ln p` once `alpha` is below
/// [`NLL_SWITCH_ALPHA`].
pub fn deformed_loss<T: Scalar>(p: Prob<T>, alpha: FocusIndex<T>) -> T {
    deformed_loss_from_log_prob(p.get().ln(), alpha)
}

/// Same as [`deformed_loss`] but from `ln p`, which keeps full precision when
/// `p` comes out of a log-softmax. `ln p` is clamped to `[ln PROB_FLOOR, 0]`.
pub fn deformed_loss_from_log_prob<T: Scalar>(log_p: T, alpha: FocusIndex<T>) -> T {
    let log_p = log_p.max(T::lit(PROB_FLOOR).ln()).min(T::zero());
    let a = alpha.value();
    if a < T::lit(NLL_SWITCH_ALPHA) {
        return -log_p;
    }
    -(a * log_p).exp_m1() / a
}
