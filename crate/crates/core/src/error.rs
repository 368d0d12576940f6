use thiserror::Error;

use crate::chamber::StratumId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid scenario: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),

    #[error("builtin `{name}`: {message}")]
    BuiltinParams { name: String, message: String },

    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("point is not strictly inside the chamber")]
    NotInterior,

    #[error("wall gap {gap:e} of radial {radial} is below the evaluation floor")]
    TooCloseToWall { radial: usize, gap: f64 },

    #[error("point lies outside the closed chamber (excess {excess:e} over tolerance)")]
    OutsideClosedChamber { excess: f64 },

    #[error("point is not on stratum {expected} (found {found})")]
    NotOnStratum { expected: StratumId, found: StratumId },

    #[error("index {0} is not a wall of the scenario")]
    NotAWall(usize),

    #[error("point is not on the chamber boundary")]
    NotOnBoundary,

    #[error("walls not concurrent")]
    NotConcurrent,

    #[error("group order exceeds max_order {0}")]
    OrderExceeded(usize),

    #[error("direction vector must be nonzero")]
    ZeroDirection,

    #[error("type-I analysis needs a collapsed trajectory")]
    NotCollapsed,

    #[error("type-I analysis applies to open-face collapse only; limit stratum is {0}")]
    CornerCollapse(StratumId),

    #[error("type-I fit window holds {0} samples, at least 10 are required")]
    FitWindow(usize),

    #[error("invalid option: {0}")]
    Options(String),
}

impl Error {
    /// Whether the error comes from malformed or invalid input data rather
    /// than from a computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation(_)
                | Error::UnknownBuiltin(_)
                | Error::BuiltinParams { .. }
                | Error::Options(_)
        )
    }
}
