use thiserror::Error;

/// Failures reported by the library.
///
/// The CLI maps these onto exit codes: validation 2, size caps 3,
/// convergence 4, infeasibility 5.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("index {index} out of range for {what} (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("size cap exceeded: {what} is {actual}, cap {cap}")]
    SizeCap {
        what: &'static str,
        cap: usize,
        actual: usize,
    },

    #[error("unsupported constraint: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations: {detail}")]
    Convergence { iterations: usize, detail: String },

    #[error("iteration cap {cap} exceeded (objective arithmetic is inconsistent)")]
    IterationCap { cap: usize },

    #[error("rounding retries exhausted: {failures} of {attempts} draws infeasible")]
    RetriesExhausted { attempts: usize, failures: usize },

    #[error("linear program is infeasible")]
    LpInfeasible,

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("matroid oracle violates the exchange axiom: {0}")]
    ExchangeAxiom(String),
}

impl CoreError {
    /// Exit code used by the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            CoreError::Validation(_)
            | CoreError::IndexOutOfRange { .. }
            | CoreError::Unsupported(_)
            | CoreError::Domain(_) => 2,
            CoreError::SizeCap { .. } => 3,
            CoreError::Convergence { .. }
            | CoreError::IterationCap { .. }
            | CoreError::ExchangeAxiom(_) => 4,
            CoreError::RetriesExhausted { .. }
            | CoreError::LpInfeasible
            | CoreError::LpUnbounded => 5,
        }
    }

    /// Stable machine-readable kind tag.
    pub fn kind(&self) -> &'static str {
        match self {
            CoreError::Validation(_) => "validation",
            CoreError::IndexOutOfRange { .. } => "index_out_of_range",
            CoreError::SizeCap { .. } => "size_cap",
            CoreError::Unsupported(_) => "unsupported",
            CoreError::Domain(_) => "domain",
            CoreError::Convergence { .. } => "convergence",
            CoreError::IterationCap { .. } => "iteration_cap",
            CoreError::RetriesExhausted { .. } => "retries_exhausted",
            CoreError::LpInfeasible => "lp_infeasible",
            CoreError::LpUnbounded => "lp_unbounded",
            CoreError::ExchangeAxiom(_) => "exchange_axiom",
        }
    }
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
