use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{logit_gradient, Logits, ObjectiveKind};

use super::model::{FeatureMap, ToyModel};

/// Initial weight scale of untrained readouts.
pub const WEAK_WEIGHT_SCALE: f64 = 0.01;
/// Mean target probability at which strong pretraining stops.
pub const STRONG_PRETRAIN_TARGET: f64 = 0.7;
/// Mean target probability at which intermediate pretraining stops.
pub const INTERMEDIATE_PRETRAIN_TARGET: f64 = 0.35;
pub const INTERMEDIATE_BAND: (f64, f64) = (0.25, 0.45);
/// Minimum mean target probability a strong task must reach.
pub const STRONG_MIN: f64 = 0.6;
/// Confidence cutoff for conflict eligibility and quadrant splits.
pub const CONFIDENCE_THRESHOLD: f64 = 0.5;

const TEACHER_SCALE: f64 = 4.0;
const PRETRAIN_LR: f64 = 0.5;
const PRETRAIN_BUDGET: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    #[serde(alias = "strong")]
    ModelStrong,
    #[serde(alias = "intermediate")]
    ModelIntermediate,
    #[serde(alias = "weak")]
    ModelWeak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConflictPolicy {
    ConfidentOnly,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub variant: Regime,
    pub vocab_size: usize,
    pub num_contexts: usize,
    pub conflict_fraction: f64,
    pub conflict_policy: ConflictPolicy,
    #[serde(default)]
    pub features: FeatureMap,
}

impl RegimeSpec {
    pub fn new(variant: Regime) -> Self {
        Self {
            variant,
            vocab_size: 32,
            num_contexts: 256,
            conflict_fraction: 0.0,
            conflict_policy: ConflictPolicy::ConfidentOnly,
            features: FeatureMap::default(),
        }
    }

    pub fn with_conflicts(mut self, fraction: f64, policy: ConflictPolicy) -> Self {
        self.conflict_fraction = fraction;
        self.conflict_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_size < 8 {
            return Err(config("vocab_size", format!("must be >= 8, got {}", self.vocab_size)));
        }
        if self.num_contexts < 64 {
            return Err(config("num_contexts", format!("must be >= 64, got {}", self.num_contexts)));
        }
        if !(0.0..1.0).contains(&self.conflict_fraction) {
            return Err(config(
                "conflict_fraction",
                format!("must lie in [0, 1), got {}", self.conflict_fraction),
            ));
        }
        Ok(())
    }

    pub fn num_conflicts(&self) -> usize {
        (self.conflict_fraction * self.num_contexts as f64).floor() as usize
    }
}

fn config(field: &'static str, detail: String) -> Error {
    Error::Config { field, detail }
}

/// Supervision targets, one per context.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Labels {
    pub targets: Vec<usize>,
    /// Contexts whose label was replaced by a conflicting one.
    pub conflicted: Vec<bool>,
}

impl Labels {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Mean probability the model assigns to the given targets.
pub fn mean_target_p(model: &ToyModel, targets: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for (c, &t) in targets.iter().enumerate() {
        total += model.dist(c)?.get(t)?;
    }
    Ok(total / targets.len() as f64)
}

/// NLL full-batch descent until the mean target probability reaches `goal`.
fn pretrain(model: &mut ToyModel, targets: &[usize], goal: f64) -> Result<f64> {
    let nll = ObjectiveKind::Nll;
    for _ in 0..PRETRAIN_BUDGET {
        let mean = mean_target_p(model, targets)?;
        if mean >= goal {
            return Ok(mean);
        }
        let grads = targets
            .iter()
            .enumerate()
            .map(|(c, &t)| Ok((c, logit_gradient(&nll, &Logits::new(model.logits(c))?, t)?)))
            .collect::<Result<Vec<_>>>()?;
        model.apply(&grads, PRETRAIN_LR);
        if !model.is_finite() {
            return Err(Error::Build("pretraining produced non-finite weights".into()));
        }
    }
    Err(Error::Build(format!(
        "pretraining did not reach mean target probability {goal} within {PRETRAIN_BUDGET} steps"
    )))
}

/// Builds a pretrained model and its fine-tuning labels for one regime.
pub fn build_task(spec: &RegimeSpec, seed: u64) -> Result<(ToyModel, Labels)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (v, n) = (spec.vocab_size, spec.num_contexts);
    let teacher = ToyModel::random(&mut rng, v, n, spec.features, TEACHER_SCALE);
    let truth: Vec<usize> = (0..n)
        .map(|c| teacher.dist(c).map(|d| d.argmax().0))
        .collect::<Result<_>>()?;
    let mut model = teacher.with_fresh_weights(&mut rng, WEAK_WEIGHT_SCALE);

    let mut targets = match spec.variant {
        Regime::ModelWeak => (0..n).map(|_| rng.random_range(0..v)).collect(),
        Regime::ModelStrong => {
            let reached = pretrain(&mut model, &truth, STRONG_PRETRAIN_TARGET)?;
            if reached < STRONG_MIN {
                return Err(Error::Build(format!("strong pretraining stopped at {reached}")));
            }
            truth
        }
        Regime::ModelIntermediate => {
            let reached = pretrain(&mut model, &truth, INTERMEDIATE_PRETRAIN_TARGET)?;
            let (lo, hi) = INTERMEDIATE_BAND;
            if !(lo..=hi).contains(&reached) {
                return Err(Error::Build(format!(
                    "intermediate pretraining overshot to {reached}, outside [{lo}, {hi}]"
                )));
            }
            truth
        }
    };

    let count = spec.num_conflicts();
    let mut conflicted = vec![false; n];
    if count > 0 {
        let mut argmax = Vec::with_capacity(n);
        for c in 0..n {
            argmax.push(model.dist(c)?.argmax());
        }
        let eligible: Vec<usize> = match spec.conflict_policy {
            ConflictPolicy::Uniform => (0..n).collect(),
            ConflictPolicy::ConfidentOnly => (0..n).filter(|&c| argmax[c].1 >= CONFIDENCE_THRESHOLD).collect(),
        };
        if eligible.len() < count {
            return Err(Error::Build(format!(
                "{count} conflicts requested but only {} contexts are eligible",
                eligible.len()
            )));
        }
        for i in index::sample(&mut rng, eligible.len(), count) {
            let c = eligible[i];
            let top = argmax[c].0;
            let mut label = rng.random_range(0..v - 1);
            if label >= top {
                label += 1;
            }
            targets[c] = label;
            conflicted[c] = true;
        }
    }
    Ok((model, Labels { targets, conflicted }))
}
