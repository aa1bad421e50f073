//! Synthetic fine-tuning harness: capability regimes, conflict injection,
//! and token-level learning / forgetting statistics.

mod model;
mod run;
mod stats;
mod task;

pub use model::{FeatureMap, ToyModel};
pub use run::{finetune, GateAudit, RunRecord, TrainConfig, GATE_AUDIT_TOKENS};
pub use stats::{
    histogram_of, moving_average, probability_histogram, quadrant_stats, uniform_edges, Histogram,
    Quadrant, QuadrantStats, TokenDelta,
};
pub use task::{
    build_task, mean_target_p, ConflictPolicy, Labels, Regime, RegimeSpec, CONFIDENCE_THRESHOLD,
    INTERMEDIATE_BAND, STRONG_MIN,
};
