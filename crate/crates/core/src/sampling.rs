//! Random draws shared by the property suite and the trainer.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::math::Dist;

/// Softmax of `scale * N(0, 1)` logits with a random scale in `[0, max_scale]`,
/// so draws range from near-uniform to sharply peaked.
pub fn random_dist<R: Rng + ?Sized>(rng: &mut R, vocab: usize, max_scale: f64) -> Dist {
    let scale = rng.random_range(0.0..=max_scale);
    let logits: Vec<f64> = (0..vocab)
        .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, rng))
        .collect::<Vec<f64>>();
    Dist::softmax(&logits).expect("finite logits")
}

/// Logits drawn uniformly from `[-bound, bound]`.
pub fn random_logits<R: Rng + ?Sized>(rng: &mut R, vocab: usize, bound: f64) -> Vec<f64> {
    (0..vocab).map(|_| rng.random_range(-bound..=bound)).collect()
}

/// Uniform draw from the simplex (flat Dirichlet).
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, vocab: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..vocab)
        .map(|_| rand_distr::Exp1.sample(rng))
        .collect::<Vec<f64>>();
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}
