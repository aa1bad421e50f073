use crate::error::{Error, Result};
use crate::math::{log_softmax, NLL_SWITCH_ALPHA};
use crate::objectives::{FrozenObjective, Logits, ObjectiveKind};

/// `J[i][j] = dP_i / dz_j = P_i (delta_ij - P_j)`.
pub fn softmax_jacobian(logits: &Logits) -> Vec<Vec<f64>> {
    let p = logits.softmax();
    let p = p.probs();
    (0..p.len())
        .map(|i| {
            (0..p.len())
                .map(|j| if i == j { p[i] * (1.0 - p[i]) } else { -p[i] * p[j] })
                .collect()
        })
        .collect()
}

/// Central finite differences of the loss along each logit. Dynamic kinds
/// are frozen at the unperturbed logits.
///
/// The log-probability increments and the loss difference are evaluated in
/// closed form, so the quotient carries no cancellation error from
/// subtracting two nearly equal losses.
pub fn fd_gradient(kind: &ObjectiveKind, logits: &Logits, target: usize, h: f64) -> Result<Vec<f64>> {
    if !(1e-8..=1e-3).contains(&h) {
        return Err(Error::domain("fd_gradient", format!("step h = {h} not in [1e-8, 1e-3]")));
    }
    let dist = logits.softmax();
    let frozen = kind.freeze(&dist, target)?;
    let log_p = log_softmax(logits.values())[target];
    let mut grad = Vec::with_capacity(logits.len());
    for (k, &pk) in dist.probs().iter().enumerate() {
        // ln p(z + s e_k) - ln p(z) = s [k = t] - ln(1 + P_k (e^s - 1))
        let shift = |s: f64| (if k == target { s } else { 0.0 }) - (pk * s.exp_m1()).ln_1p();
        let (up, down) = (shift(h), shift(-h));
        let diff = match frozen {
            FrozenObjective::WeightedNll(w) => -w * (up - down),
            FrozenObjective::Deformed(a) if a.value() < NLL_SWITCH_ALPHA => -(up - down),
            FrozenObjective::Deformed(a) => {
                let a = a.value();
                -(a * (log_p + down)).exp() * (a * (up - down)).exp_m1() / a
            }
        };
        if !diff.is_finite() {
            return Err(Error::NonFinite("finite-difference loss evaluation"));
        }
        grad.push(diff / (2.0 * h));
    }
    Ok(grad)
}

/// `max |a - b| / max |a|`, the max-norm relative error of `b` against `a`.
pub fn relative_error(reference: &[f64], candidate: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = reference
        .iter()
        .zip(candidate)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
