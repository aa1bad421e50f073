//! State-dependent focus trajectories on the uncertainty radius `z = sqrt(1 - p)`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::types::{FocusIndex, UncertaintyRadius};

fn check_unit<T: Scalar>(op: &'static str, p: T) -> Result<()> {
    if !p.is_finite() || p < T::zero() || p > T::one() {
        return Err(Error::domain(op, format!("p = {p} not in [0, 1]")));
    }
    Ok(())
}

/// Cayley trajectory `(1 - sqrt(1-p)) / (1 + sqrt(1-p))`.
///
/// Evaluated as `p / (1 + sqrt(1-p))^2`, which is the same quantity without
/// the cancellation in the numerator near `p = 0`. Endpoints are exact:
/// `0 -> 0` and `1 -> 1`.
pub fn cayley_alpha<T: Scalar>(p: T) -> Result<FocusIndex<T>> {
    check_unit("cayley_alpha", p)?;
    let z = (T::one() - p).sqrt();
    let denom = T::one() + z;
    Ok(FocusIndex::new_unchecked(p / (denom * denom)))
}

/// One-parameter Mobius family `(1 - z) / (1 + kappa z)` swapping the
/// endpoints of `[0, 1]`. `kappa = 1` is the Cayley transform.
pub fn mobius_alpha<T: Scalar>(z: UncertaintyRadius<T>, kappa: T) -> Result<T> {
    if !kappa.is_finite() || kappa <= -T::one() {
        return Err(Error::domain("mobius_alpha", format!("kappa = {kappa} must be > -1")));
    }
    let z = z.value();
    Ok((T::one() - z) / (T::one() + kappa * z))
}

/// Error surprisal `-ln(1 - p)`; infinite at `p = 1`.
pub fn error_surprisal<T: Scalar>(p: T) -> Result<T> {
    check_unit("error_surprisal", p)?;
    Ok(-(-p).ln_1p())
}

/// `tanh(I_err / 4)`; coincides with [`cayley_alpha`]. Returns 1 at `p = 1`.
pub fn surprisal_alpha<T: Scalar>(p: T) -> Result<FocusIndex<T>> {
    check_unit("surprisal_alpha", p)?;
    if p == T::one() {
        return Ok(FocusIndex::one());
    }
    let quarter = T::lit(0.25);
    Ok(FocusIndex::new_unchecked((error_surprisal(p)? * quarter).tanh()))
}
