use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Every variant carries the name of the operation that failed so that
/// callers (and the CLI) can report the offending call without extra context.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("{op}: domain error: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("{op}: points coincide (|x - y| = {distance:e})")]
    Coincidence { op: &'static str, distance: f64 },

    #[error("{op}: integral diverges: {detail}")]
    Divergence { op: &'static str, detail: String },

    #[error("{op}: no convergence: {detail}")]
    NonConvergence { op: &'static str, detail: String },

    #[error("{op}: dimension {dim} is not supported (N must be 1, 2 or 3)")]
    UnsupportedDimension { op: &'static str, dim: usize },

    #[error("{op}: size {size} outside the supported range {range}")]
    Size {
        op: &'static str,
        size: usize,
        range: &'static str,
    },

    #[error("{op}: positivity violated: {detail}")]
    Positivity { op: &'static str, detail: String },

    #[error("{op}: precondition violated: {detail}")]
    Precondition { op: &'static str, detail: String },

    #[error("{op}: admissibility condition not satisfied: {detail}")]
    ConditionNotSatisfied { op: &'static str, detail: String },

    #[error("{op}: no crossing found on grids up to {grid} radii")]
    NoCrossing { op: &'static str, grid: usize },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn precondition(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn non_convergence(op: &'static str, detail: impl Into<String>) -> Self {
        Error::NonConvergence {
            op,
            detail: detail.into(),
        }
    }

    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::Positivity { .. } | Error::NoCrossing { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
