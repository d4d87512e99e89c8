use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// Variants fall into three classes that the command-line front end maps to
/// distinct exit codes: malformed input ([`Error::Parse`]), exhausted work
/// budgets ([`Error::is_resource`]) and everything else, which is a domain
/// error.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("no contracting fixed point: slope {slope} is not below 1")]
    NoContractingFixedPoint { slope: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("undefined extended arithmetic: {0}")]
    UndefinedInfinity(String),

    #[error("monotone-term condition violated at node {path:?}: value {value} does not exceed child value {child}")]
    NotMonotone {
        path: Vec<usize>,
        value: String,
        child: String,
    },

    #[error("invalid closure system: {0}")]
    Construction(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ordinal term is not in normal form: {0}")]
    NonNormal(String),

    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("work budget of {budget} exhausted while computing {what}")]
    BudgetExceeded { budget: u64, what: String },

    #[error("{what} not certified a successor element within scan cap {cap}")]
    ScanCapExhausted { cap: usize, what: String },

    #[error("time limit reached while computing {what}")]
    DeadlineExceeded { what: String },
}

impl Error {
    /// True for errors caused by a configured work limit rather than by the input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded { .. } | Error::ScanCapExhausted { .. } | Error::DeadlineExceeded { .. }
        )
    }

    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Parse(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
