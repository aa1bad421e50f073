use serde::Serialize;

use crate::error::{Error, Result};

use super::model::ToyModel;
use super::task::CONFIDENCE_THRESHOLD;

/// Sign pattern of `(dP, dL)` for one supervised token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quadrant {
    /// `dP >= 0, dL >= 0` (not learning).
    Q1,
    /// `dP < 0, dL > 0`: forgetting.
    Q2,
    /// `dP <= 0, dL <= 0` (not forgetting).
    Q3,
    /// `dP > 0, dL < 0`: learning.
    Q4,
}

impl Quadrant {
    pub fn classify(dp: f64, dl: f64) -> Self {
        if dp > 0.0 && dl < 0.0 {
            Quadrant::Q4
        } else if dp < 0.0 && dl > 0.0 {
            Quadrant::Q2
        } else if dp >= 0.0 && dl >= 0.0 {
            Quadrant::Q1
        } else {
            Quadrant::Q3
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TokenDelta {
    pub context: usize,
    pub target: usize,
    pub conflicted: bool,
    pub p_before: f64,
    pub p_after: f64,
    pub loss_before: f64,
    pub loss_after: f64,
    pub quadrant: Quadrant,
    pub high_confidence: bool,
}

impl TokenDelta {
    /// `loss_*` should be measured under one fixed loss so that the
    /// quadrant reflects a single objective.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        context: usize,
        target: usize,
        conflicted: bool,
        p_before: f64,
        p_after: f64,
        loss_before: f64,
        loss_after: f64,
    ) -> Self {
        Self {
            context,
            target,
            conflicted,
            p_before,
            p_after,
            loss_before,
            loss_after,
            quadrant: Quadrant::classify(p_after - p_before, loss_after - loss_before),
            high_confidence: p_before >= CONFIDENCE_THRESHOLD,
        }
    }
}

/// Learning / forgetting proportions over all tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadrantStats {
    pub tokens: usize,
    pub learning: f64,
    pub learning_high: f64,
    pub learning_low: f64,
    pub forgetting: f64,
    pub forgetting_high: f64,
    pub forgetting_low: f64,
    /// Fraction of forgetting tokens that started high-confidence.
    pub forgetting_high_share: f64,
}

pub fn quadrant_stats(deltas: &[TokenDelta]) -> Result<QuadrantStats> {
    if deltas.is_empty() {
        return Err(Error::Unsupported("quadrant statistics of an empty token list".into()));
    }
    let n = deltas.len() as f64;
    let count = |q: Quadrant, high: Option<bool>| {
        deltas
            .iter()
            .filter(|d| d.quadrant == q && high.is_none_or(|h| d.high_confidence == h))
            .count() as f64
    };
    let forgetting = count(Quadrant::Q2, None);
    let forgetting_high = count(Quadrant::Q2, Some(true));
    Ok(QuadrantStats {
        tokens: deltas.len(),
        learning: count(Quadrant::Q4, None) / n,
        learning_high: count(Quadrant::Q4, Some(true)) / n,
        learning_low: count(Quadrant::Q4, Some(false)) / n,
        forgetting: forgetting / n,
        forgetting_high: forgetting_high / n,
        forgetting_low: count(Quadrant::Q2, Some(false)) / n,
        forgetting_high_share: if forgetting > 0.0 { forgetting_high / forgetting } else { 0.0 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// `count + 1` equal-width edges on `[0, 1]`.
pub fn uniform_edges(count: usize) -> Vec<f64> {
    (0..=count).map(|i| i as f64 / count as f64).collect()
}

/// Bins are `[e0, e1], (e1, e2], ..., (e_{k-1}, e_k]`.
pub fn histogram_of(values: &[f64], edges: &[f64]) -> Result<Histogram> {
    if edges.len() < 2 {
        return Err(Error::BinEdges(format!("need at least 2 edges, got {}", edges.len())));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BinEdges("edges must be finite and strictly ascending".into()));
    }
    if edges[0] > 0.0 || edges[edges.len() - 1] < 1.0 {
        return Err(Error::BinEdges(format!(
            "edges [{}, {}] do not cover (0, 1]",
            edges[0],
            edges[edges.len() - 1]
        )));
    }
    let mut counts = vec![0; edges.len() - 1];
    for &v in values {
        let bin = edges[1..].partition_point(|&e| e < v).min(counts.len() - 1);
        counts[bin] += 1;
    }
    Ok(Histogram {
        edges: edges.to_vec(),
        counts,
    })
}

/// Histogram of target-token probabilities over all contexts.
pub fn probability_histogram(model: &ToyModel, targets: &[usize], edges: &[f64]) -> Result<Histogram> {
    let probs = targets
        .iter()
        .enumerate()
        .map(|(c, &t)| model.dist(c)?.get(t))
        .collect::<Result<Vec<_>>>()?;
    histogram_of(&probs, edges)
}

/// Trailing moving average; the first `window - 1` entries average what is
/// available.
pub fn moving_average(trace: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    (0..trace.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(window);
            let slice = &trace[lo..=i];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}
