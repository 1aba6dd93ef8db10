use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("{matrix}[{row}][{col}] = {value} is outside [0, 1]")]
    RangeViolation {
        matrix: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("slots `{first}` and `{second}` overlap or are out of chronological order")]
    SlotOverlap { first: String, second: String },

    #[error("{talks} talks cannot be scheduled one-to-one into {slots} slots")]
    TooManyTalks { talks: usize, slots: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid participant weight {value} at index {index}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unknown talk id `{0}`")]
    UnknownTalkId(String),

    #[error("unknown slot id `{0}`")]
    UnknownSlotId(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("gini index is undefined for an all-zero vector")]
    AllZero,

    #[error("normalizer for {what} {index} is zero")]
    DegenerateNormalization { what: &'static str, index: usize },

    #[error("exhaustive search needs {required} assignments, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("round {round} needs {needed} slots but only {available} remain")]
    SlotsExhausted {
        round: usize,
        needed: usize,
        available: usize,
    },
}

impl Error {
    /// Errors raised while solving, as opposed to rejecting the input.
    pub fn is_solver_error(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded { .. }
                | Error::Infeasible
                | Error::Unbounded
                | Error::NumericalFailure(_)
                | Error::SlotsExhausted { .. }
                | Error::DegenerateNormalization { .. }
        )
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::RangeViolation { .. } => "RangeViolation",
            Error::SlotOverlap { .. } => "SlotOverlap",
            Error::TooManyTalks { .. } => "TooManyTalks",
            Error::InvalidInstance(_) => "InvalidInstance",
            Error::InvalidWeight { .. } => "InvalidWeight",
            Error::Parse(_) => "ParseError",
            Error::Io { .. } => "IoError",
            Error::UnknownTalkId(_) => "UnknownTalkId",
            Error::UnknownSlotId(_) => "UnknownSlotId",
            Error::InvalidSchedule(_) => "InvalidSchedule",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::AllZero => "AllZero",
            Error::DegenerateNormalization { .. } => "DegenerateNormalization",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::Infeasible => "Infeasible",
            Error::Unbounded => "Unbounded",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::SlotsExhausted { .. } => "SlotsExhausted",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
