use serde::Serialize;

use crate::fractional::{MnwCertificate, MpfResult};
use crate::instance::{FractionalOutcome, IntegralOutcome};
use crate::rounding::GroupingDiagnostics;
use crate::scalar::Scalar;

/// Solver-specific quantities; absent fields are omitted from JSON.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct Diagnostics<S> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<S>,
    /// Minimum objective gain an accepted move must achieve.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iteration_cap: Option<usize>,
    /// Sampling attempts made, including the accepted one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retries: Option<usize>,
    /// Additive slack the packing pipeline targets, `5 Q_L / gamma^4`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_target: Option<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<MnwCertificate<S>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mpf: Option<MpfResult<S>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grouping: Option<GroupingDiagnostics<S>>,
}

/// Result of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct SolverReport<S> {
    pub solver: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<IntegralOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fractional: Option<FractionalOutcome<S>>,
    /// Objective value after each accepted step, starting with the initial
    /// point.
    pub objective_trace: Vec<S>,
    pub iterations: usize,
    pub diagnostics: Diagnostics<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl<S: Scalar> SolverReport<S> {
    pub fn new(solver: &'static str) -> Self {
        SolverReport {
            solver,
            outcome: None,
            fractional: None,
            objective_trace: Vec::new(),
            iterations: 0,
            diagnostics: Diagnostics::default(),
            seed: None,
        }
    }

    /// The integral outcome; panics for reports that only carry weights.
    pub fn integral(&self) -> &IntegralOutcome {
        self.outcome.as_ref().expect("report carries an integral outcome")
    }
}
