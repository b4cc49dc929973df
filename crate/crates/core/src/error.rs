use thiserror::Error;

use crate::invariance::IterationReport;

pub type Result<T> = std::result::Result<T, MeanError>;

#[derive(Debug, Clone, Error)]
pub enum MeanError {
    #[error("arity mismatch: expected {expected} coordinates, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("constant input: contraction gap is undefined on the diagonal")]
    ConstantInput,

    #[error("iteration did not converge after {} steps (diameter {:e})", .0.iterations, .0.diameter)]
    NotConverged(Box<IterationReport>),

    #[error("invariance bracket failed at x = {x:?}: f(lo) = {f_lo}, f(hi) = {f_hi}, target = {target}")]
    NotInvariant { x: Vec<f64>, f_lo: f64, f_hi: f64, target: f64 },

    #[error("no solution in [{lo}, {hi}]: target {target} lies outside [{f_lo}, {f_hi}]")]
    NoSolutionInRange { lo: f64, hi: f64, f_lo: f64, f_hi: f64, target: f64 },

    #[error("index set covers every coordinate; the dual complement is undefined")]
    SIsFull,

    #[error("index set is empty")]
    EmptySubset,

    #[error("exponent vector does not sum to zero (sum = {0})")]
    NonInvariantRoot(String),

    #[error("rational arithmetic overflow")]
    ArithmeticOverflow,

    #[error("node budget of {0} exceeded")]
    BudgetExceeded(usize),

    #[error("invalid index {index} for arity {arity}")]
    InvalidIndex { index: usize, arity: usize },

    #[error("invalid mean specification: {0}")]
    InvalidSpec(String),
}

impl MeanError {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            MeanError::ArityMismatch { .. } => "ArityMismatch",
            MeanError::DomainViolation(_) => "DomainViolation",
            MeanError::ConstantInput => "ConstantInput",
            MeanError::NotConverged(_) => "NotConverged",
            MeanError::NotInvariant { .. } => "NotInvariant",
            MeanError::NoSolutionInRange { .. } => "NoSolutionInRange",
            MeanError::SIsFull => "SIsFull",
            MeanError::EmptySubset => "EmptySubset",
            MeanError::NonInvariantRoot(_) => "NonInvariantRoot",
            MeanError::ArithmeticOverflow => "ArithmeticOverflow",
            MeanError::BudgetExceeded(_) => "BudgetExceeded",
            MeanError::InvalidIndex { .. } => "InvalidIndex",
            MeanError::InvalidSpec(_) => "InvalidSpec",
        }
    }
}
