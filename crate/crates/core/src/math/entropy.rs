use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::types::{Dist, FocusIndex};
use super::Q_LIMIT_EPS;

/// Shannon entropy in nats; zero-mass entries contribute nothing.
pub fn shannon_entropy<T: Scalar>(r: &Dist<T>) -> T {
    r.probs()
        .iter()
        .filter(|&&v| v > T::zero())
        .map(|&v| -v * v.ln())
        .sum()
}

/// Tsallis entropy `S_q(r) = (1 - sum r^q) / (q - 1)`; Shannon at `q = 1`.
pub fn tsallis_entropy<T: Scalar>(r: &Dist<T>, q: T) -> Result<T> {
    if !q.is_finite() || q <= T::zero() {
        return Err(Error::domain("tsallis_entropy", format!("q = {q} must be > 0")));
    }
    if (q - T::one()).abs() < T::lit(Q_LIMIT_EPS) {
        return Ok(shannon_entropy(r));
    }
    let power_sum: T = r
        .probs()
        .iter()
        .filter(|&&v| v > T::zero())
        .map(|&v| v.powf(q))
        .sum();
    Ok(((T::one() - power_sum) / (q - T::one())).max(T::zero()))
}

/// Order-2 Renyi (collision) entropy `-ln sum P^2`.
pub fn renyi2_entropy<T: Scalar>(p: &Dist<T>) -> T {
    -sum_of_squares(p).ln()
}

/// Collision probability `sum P(v)^2`, used directly as the DEFT focus index.
/// Lies in `[1/|V|, 1]`.
pub fn concentration<T: Scalar>(p: &Dist<T>) -> FocusIndex<T> {
    FocusIndex::new_unchecked(sum_of_squares(p).min(T::one()))
}

fn sum_of_squares<T: Scalar>(p: &Dist<T>) -> T {
    p.probs().iter().map(|&v| v * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsallis_examples() {
        let u = Dist::<f64>::uniform(2).unwrap();
        assert!((tsallis_entropy(&u, 2.0).unwrap() - 0.5).abs() < 1e-15);
        let h = Dist::<f64>::one_hot(3, 1).unwrap();
        assert_eq!(tsallis_entropy(&h, 2.0).unwrap(), 0.0);
        let d = Dist::<f64>::new(vec![0.9, 0.1]).unwrap();
        assert!((tsallis_entropy(&d, 2.0).unwrap() - 0.18).abs() < 1e-15);
        assert!(tsallis_entropy(&d, 0.0).is_err());
        assert!(tsallis_entropy(&d, -1.0).is_err());
    }

    #[test]
    fn tsallis_limit_is_shannon() {
        let d = Dist::<f64>::new(vec![0.2, 0.3, 0.5]).unwrap();
        let s = shannon_entropy(&d);
        assert_eq!(tsallis_entropy(&d, 1.0).unwrap(), s);
        assert!((tsallis_entropy(&d, 1.0 + 1e-6).unwrap() - s).abs() < 1e-5);
    }

    #[test]
    fn concentration_examples() {
        assert_eq!(concentration(&Dist::<f64>::uniform(4).unwrap()).value(), 0.25);
        assert_eq!(concentration(&Dist::<f64>::one_hot(4, 2).unwrap()).value(), 1.0);
        let d = Dist::<f64>::new(vec![0.9, 0.1]).unwrap();
        assert!((concentration(&d).value() - 0.82).abs() < 1e-15);
    }

    #[test]
    fn concentration_is_exp_neg_renyi2() {
        let d = Dist::<f64>::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let c = concentration(&d).value();
        assert!((c - (-renyi2_entropy(&d)).exp()).abs() < 1e-15);
    }
}
