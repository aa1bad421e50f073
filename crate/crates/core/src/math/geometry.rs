use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Fisher-Rao geodesic distance from `Bern(p)` to certainty `Bern(1)`:
/// `2 arccos(sqrt p)`.
pub fn fisher_rao_distance<T: Scalar>(p: T) -> Result<T> {
    if !p.is_finite() || p < T::zero() || p > T::one() {
        return Err(Error::domain("fisher_rao_distance", format!("p = {p} not in [0, 1]")));
    }
    Ok(T::lit(2.0) * p.sqrt().acos())
}

/// `sin(d / 2)`, which recovers the uncertainty radius `sqrt(1 - p)`.
pub fn radius_from_distance<T: Scalar>(distance: T) -> T {
    (distance * T::lit(0.5)).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn distance_examples() {
        assert_eq!(fisher_rao_distance(1.0).unwrap(), 0.0);
        assert!((fisher_rao_distance(0.0).unwrap() - PI).abs() < 1e-15);
        assert!((fisher_rao_distance(0.5).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!(fisher_rao_distance(1.5).is_err());
    }

    #[test]
    fn half_distance_sine_is_radius() {
        for i in 0..=200 {
            let p = i as f64 / 200.0;
            let d = fisher_rao_distance(p).unwrap();
            assert!((radius_from_distance(d) - (1.0 - p).sqrt()).abs() < 1e-12);
        }
    }
}
