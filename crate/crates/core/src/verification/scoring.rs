//! Expected scores of the two scoring rules induced by the deformed loss and
//! a brute-force simplex minimizer of the associated risk.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::{Dist, FocusIndex};
use crate::sampling::random_simplex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringRuleKind {
    /// `S(phat, y) = (1 - phat(y)^a) / a`, the deformed loss used as a score.
    /// Not proper for `a in (0, 1)`: its risk minimizer is the escort
    /// distribution `r^(1/(1-a))`, not `r`.
    MainText,
    /// `S(phat, y) = (1 - (1+a) phat(y)^a + a sum phat^(1+a)) / a`, the proper
    /// Tsallis score whose Bayes risk is `S_{1+a}(r)`.
    ProperTsallis,
}

impl fmt::Display for ScoringRuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MainText => "main",
            Self::ProperTsallis => "proper",
        })
    }
}

impl FromStr for ScoringRuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "main" | "main_text" => Ok(Self::MainText),
            "proper" | "proper_tsallis" => Ok(Self::ProperTsallis),
            other => Err(Error::Config {
                field: "rule",
                detail: format!("unknown scoring rule `{other}` (expected main or proper)"),
            }),
        }
    }
}

fn risk(r: &[f64], phat: &[f64], a: f64, rule: ScoringRuleKind) -> f64 {
    let cross: f64 = r.iter().zip(phat).map(|(&ri, &qi)| ri * qi.powf(a)).sum();
    match rule {
        ScoringRuleKind::MainText => (1.0 - cross) / a,
        ScoringRuleKind::ProperTsallis => {
            let self_term: f64 = phat.iter().map(|&qi| qi.powf(1.0 + a)).sum();
            1.0 / a - (1.0 + a) / a * cross + self_term
        }
    }
}

fn risk_gradient(r: &[f64], phat: &[f64], a: f64, rule: ScoringRuleKind) -> Vec<f64> {
    r.iter()
        .zip(phat)
        .map(|(&ri, &qi)| match rule {
            ScoringRuleKind::MainText => -ri * qi.powf(a - 1.0),
            ScoringRuleKind::ProperTsallis => (1.0 + a) * (qi.powf(a) - ri * qi.powf(a - 1.0)),
        })
        .collect()
}

/// `E_{y ~ r}[S(phat, y)]`, summed exactly over the vocabulary.
pub fn expected_score(r: &Dist, phat: &Dist, alpha: FocusIndex, rule: ScoringRuleKind) -> Result<f64> {
    if r.len() != phat.len() {
        return Err(Error::LengthMismatch {
            left: r.len(),
            right: phat.len(),
        });
    }
    let a = positive_alpha(alpha)?;
    Ok(risk(r.probs(), phat.probs(), a, rule))
}

fn positive_alpha(alpha: FocusIndex) -> Result<f64> {
    let a = alpha.value();
    if a <= 0.0 {
        return Err(Error::domain("expected_score", "alpha must be > 0"));
    }
    Ok(a)
}

/// Euclidean projection onto `{x : sum x = 1, x_i >= floor}`.
pub fn project_to_simplex(y: &[f64], floor: f64) -> Vec<f64> {
    let n = y.len();
    let mass = 1.0 - floor * n as f64;
    let shifted: Vec<f64> = y.iter().map(|v| v - floor).collect();
    let mut sorted = shifted.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - mass) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    shifted.iter().map(|v| (v - theta).max(0.0) + floor).collect()
}

const MAX_VOCAB: usize = 6;
const RESTARTS: usize = 16;
const DESCENT_TOL: f64 = 1e-8;
const DESCENT_MAX_ITERS: usize = 20_000;
const INTERIOR_FLOOR: f64 = 1e-12;
const ORACLE_SEED: u64 = 0x5eed_d1a1;

fn grid_resolution(vocab: usize) -> usize {
    if vocab <= 3 {
        400
    } else {
        24
    }
}

/// Visits every point of the simplex lattice with spacing `1/n`.
fn for_each_lattice_point(vocab: usize, n: usize, mut visit: impl FnMut(&[f64])) {
    fn recurse(idx: usize, remaining: usize, n: usize, buf: &mut Vec<f64>, visit: &mut dyn FnMut(&[f64])) {
        if idx + 1 == buf.len() {
            buf[idx] = remaining as f64 / n as f64;
            visit(buf);
            return;
        }
        for k in 0..=remaining {
            buf[idx] = k as f64 / n as f64;
            recurse(idx + 1, remaining - k, n, buf, visit);
        }
    }
    let mut buf = vec![0.0; vocab];
    recurse(0, n, n, &mut buf, &mut visit);
}

/// Projected gradient descent with backtracking on the quadratic upper model.
fn descend(r: &[f64], start: Vec<f64>, a: f64, rule: ScoringRuleKind) -> (Vec<f64>, f64) {
    let mut x = project_to_simplex(&start, INTERIOR_FLOOR);
    let mut fx = risk(r, &x, a, rule);
    let mut step = 1.0;
    for _ in 0..DESCENT_MAX_ITERS {
        let g = risk_gradient(r, &x, a, rule);
        let mut accepted = None;
        for _ in 0..80 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
            let cand = project_to_simplex(&trial, INTERIOR_FLOOR);
            let fc = risk(r, &cand, a, rule);
            let (lin, sq) = cand.iter().zip(&x).zip(&g).fold((0.0, 0.0), |(l, s), ((c, xi), gi)| {
                let d = c - xi;
                (l + gi * d, s + d * d)
            });
            if fc <= fx + lin + sq / (2.0 * step) + 1e-15 {
                accepted = Some((cand, fc));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, fc)) = accepted else { break };
        let moved = cand.iter().zip(&x).fold(0.0f64, |m, (c, xi)| m.max((c - xi).abs()));
        x = cand;
        fx = fc;
        if moved < DESCENT_TOL {
            break;
        }
        step *= 2.0;
    }
    (x, fx)
}

/// Minimizes the expected score over the simplex: lattice scan (spacing
/// 1/400 for `|V| <= 3`), then projected descent from the best lattice point
/// and from 16 seeded random restarts. Returns the best minimizer and risk.
pub fn minimize_risk(r: &Dist, alpha: FocusIndex, rule: ScoringRuleKind) -> Result<(Dist, f64)> {
    let vocab = r.len();
    if vocab > MAX_VOCAB {
        return Err(Error::Unsupported(format!(
            "minimize_risk supports |V| <= {MAX_VOCAB}, got {vocab}"
        )));
    }
    let a = positive_alpha(alpha)?;
    let rp = r.probs();

    let mut best_grid = (vec![1.0 / vocab as f64; vocab], f64::INFINITY);
    for_each_lattice_point(vocab, grid_resolution(vocab), |q| {
        let v = risk(rp, q, a, rule);
        if v < best_grid.1 {
            best_grid = (q.to_vec(), v);
        }
    });

    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    let mut starts = vec![best_grid.0.clone()];
    starts.extend((0..RESTARTS).map(|_| random_simplex(&mut rng, vocab)));

    let mut best = best_grid;
    for start in starts {
        let (x, fx) = descend(rp, start, a, rule);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    let total: f64 = best.0.iter().sum();
    let minimizer = Dist::new(best.0.iter().map(|v| v / total).collect())?;
    Ok((minimizer, best.1))
}
