use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Prob;
use crate::objectives::{focus_index, gate, logit_gradient, FrozenObjective, Logits, ObjectiveKind};

use super::model::ToyModel;
use super::stats::{probability_histogram, quadrant_stats, uniform_edges, Histogram, QuadrantStats, TokenDelta};
use super::task::Labels;

/// Tokens instrumented for the runtime gate-ordering audit.
pub const GATE_AUDIT_TOKENS: usize = 100;
const HISTOGRAM_BINS: usize = 10;
const AUDIT_SLACK: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub objective: ObjectiveKind,
    pub learning_rate: f64,
    pub steps: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl TrainConfig {
    /// Full-batch defaults: `lr = 0.5`, 200 steps.
    pub fn new(objective: ObjectiveKind, num_contexts: usize, seed: u64) -> Self {
        Self {
            objective,
            learning_rate: 0.5,
            steps: 200,
            batch_size: num_contexts,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config {
                field: "learning_rate",
                detail: format!("must be positive and finite, got {}", self.learning_rate),
            });
        }
        if self.batch_size == 0 {
            return Err(Error::Config {
                field: "batch_size",
                detail: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Violations of `linear <= deft <= nll` among audited token signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GateAudit {
    pub checked: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub config: TrainConfig,
    /// Mean target probability before each step.
    pub mean_target_p: Vec<f64>,
    /// Mean focus index before each step.
    pub mean_alpha: Vec<f64>,
    pub quadrants: QuadrantStats,
    /// Target-probability histograms before and after training.
    pub histograms: Vec<Histogram>,
    pub gate_audit: GateAudit,
    pub deltas: Vec<TokenDelta>,
}

impl RunRecord {
    pub fn final_mean_target_p(&self) -> f64 {
        mean(self.deltas.iter().map(|d| d.p_after))
    }

    /// Final mean target probability over contexts whose label was not
    /// replaced by a conflict.
    pub fn clean_mean_target_p(&self) -> f64 {
        mean(self.deltas.iter().filter(|d| !d.conflicted).map(|d| d.p_after))
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

struct Snapshot {
    p: Vec<f64>,
    alpha: Vec<f64>,
}

fn snapshot(model: &ToyModel, labels: &Labels, kind: &ObjectiveKind) -> Result<Snapshot> {
    let mut p = Vec::with_capacity(labels.len());
    let mut alpha = Vec::with_capacity(labels.len());
    for (c, &t) in labels.targets.iter().enumerate() {
        let d = model.dist(c)?;
        p.push(d.get(t)?);
        alpha.push(focus_index(kind, &d, t)?.value());
    }
    Ok(Snapshot { p, alpha })
}

fn audit(model: &ToyModel, labels: &Labels, tokens: &[usize], tally: &mut GateAudit) -> Result<()> {
    for &c in tokens {
        let d = model.dist(c)?;
        let t = labels.targets[c];
        let lin = gate(&ObjectiveKind::LinearProb, &d, t)?.signal;
        let deft = gate(&ObjectiveKind::Deft, &d, t)?.signal;
        let nll = gate(&ObjectiveKind::Nll, &d, t)?.signal;
        tally.checked += 1;
        if lin > deft + AUDIT_SLACK || deft > nll + AUDIT_SLACK {
            tally.violations += 1;
        }
    }
    Ok(())
}

/// Plain gradient descent on `model` with per-token logit gradients of
/// `cfg.objective`. Minibatches, when smaller than the context set, are
/// drawn without replacement from a generator seeded by `cfg.seed`.
pub fn finetune(model: &mut ToyModel, labels: &Labels, cfg: &TrainConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let n = model.num_contexts();
    if labels.len() != n || labels.conflicted.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: labels.len(),
        });
    }
    if let Some(&bad) = labels.targets.iter().find(|&&t| t >= model.vocab_size()) {
        return Err(Error::TargetOutOfRange {
            target: bad,
            vocab: model.vocab_size(),
        });
    }
    let kind = &cfg.objective;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let audited: Vec<usize> = index::sample(&mut rng, n, GATE_AUDIT_TOKENS.min(n)).into_vec();
    let edges = uniform_edges(HISTOGRAM_BINS);

    // Loss bookkeeping uses each token's objective frozen at its initial state.
    let mut frozen: Vec<FrozenObjective> = Vec::with_capacity(n);
    for (c, &t) in labels.targets.iter().enumerate() {
        frozen.push(kind.freeze(&model.dist(c)?, t)?);
    }
    let start_hist = probability_histogram(model, &labels.targets, &edges)?;
    let before = snapshot(model, labels, kind)?;

    let mut mean_target_p = Vec::with_capacity(cfg.steps);
    let mut mean_alpha = Vec::with_capacity(cfg.steps);
    let mut tally = GateAudit {
        checked: 0,
        violations: 0,
    };
    let full_batch = cfg.batch_size >= n;
    for step in 0..cfg.steps {
        let snap = if step == 0 { None } else { Some(snapshot(model, labels, kind)?) };
        let snap = snap.as_ref().unwrap_or(&before);
        mean_target_p.push(mean(snap.p.iter().copied()));
        mean_alpha.push(mean(snap.alpha.iter().copied()));
        audit(model, labels, &audited, &mut tally)?;

        let batch: Vec<usize> = if full_batch {
            (0..n).collect()
        } else {
            index::sample(&mut rng, n, cfg.batch_size).into_vec()
        };
        let mut grads = Vec::with_capacity(batch.len());
        for c in batch {
            let z = Logits::new(model.logits(c)).map_err(|e| Error::Training {
                step,
                detail: e.to_string(),
            })?;
            grads.push((c, logit_gradient(kind, &z, labels.targets[c])?));
        }
        model.apply(&grads, cfg.learning_rate);
        if !model.is_finite() {
            return Err(Error::Training {
                step,
                detail: "non-finite weights after update".into(),
            });
        }
    }

    let after = snapshot(model, labels, kind)?;
    let deltas: Vec<TokenDelta> = (0..n)
        .map(|c| {
            let (pb, pa) = (before.p[c], after.p[c]);
            TokenDelta::new(
                c,
                labels.targets[c],
                labels.conflicted[c],
                pb,
                pa,
                frozen[c].loss(Prob::clamped(pb)),
                frozen[c].loss(Prob::clamped(pa)),
            )
        })
        .collect();
    Ok(RunRecord {
        config: cfg.clone(),
        mean_target_p,
        mean_alpha,
        quadrants: quadrant_stats(&deltas)?,
        histograms: vec![start_hist, probability_histogram(model, &labels.targets, &edges)?],
        gate_audit: tally,
        deltas,
    })
}
