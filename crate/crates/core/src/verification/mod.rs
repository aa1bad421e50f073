//! Independent numerical oracles for the identities and inequalities of the
//! objective family: finite differences, simplex search, grid scans and the
//! exact identity-feature gradient-flow setting.

mod flow;
mod jacobian;
mod peak;
mod scoring;
mod suite;

use serde::Serialize;

pub use flow::{gradient_flow_difference, gradient_flow_ordering, FlowRegime, FLOW_VOCAB};
pub use jacobian::{fd_gradient, relative_error, softmax_jacobian};
pub use peak::{peak_location, peak_location_with_derivative, PEAK_GRID_POINTS};
pub use scoring::{expected_score, minimize_risk, project_to_simplex, ScoringRuleKind};
pub use suite::{run_property_suite, run_property_suite_with, SuiteConfig};

/// Outcome of one certified property. `passed` iff `max_error <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub detail: String,
}

impl PropertyReport {
    /// NaN errors fail.
    pub fn check(name: impl Into<String>, max_error: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        let detail = detail.into();
        Self {
            name: name.into(),
            passed: max_error <= tolerance,
            max_error,
            detail: if detail.is_empty() {
                format!("tolerance {tolerance:e}")
            } else {
                format!("{detail}; tolerance {tolerance:e}")
            },
        }
    }
}
