use thiserror::Error;

/// Broad classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The input violates a structural or probabilistic requirement.
    Validation,
    /// A numerical procedure failed to reach its tolerance.
    Numeric,
    /// A size guard refused the request.
    Resource,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {msg}{}", location(*row, *col))]
    Validation {
        msg: String,
        row: Option<usize>,
        col: Option<usize>,
    },

    #[error("every symbol was removed while enforcing that each parent admits a child")]
    EmptyModel,

    #[error("no symbol reaches every other symbol; use the general upper bound")]
    A1Violated,

    #[error("adjacency matrix is not irreducible; use the general upper bound")]
    NotIrreducible,

    #[error("the recurrent set is empty: the shift has finitely many trees")]
    EmptyRecurrentSet,

    #[error("labeled tree is not admissible at node {node} (child {child}, parent {parent})")]
    InadmissibleTree {
        node: usize,
        child: usize,
        parent: usize,
    },

    #[error("weight vanishes on traversed edge (child {child}, parent {parent})")]
    SupportMismatch { child: usize, parent: usize },

    #[error("P is positive where W vanishes at entry ({row}, {col})")]
    SupportViolation { row: usize, col: usize },

    #[error("trees have different shapes")]
    ShapeMismatch,

    #[error("bad exponent vector: {0}")]
    BadExponent(String),

    #[error("{what} did not converge after {iterations} iterations (bracket [{lo}, {hi}])")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        lo: f64,
        hi: f64,
    },

    #[error("search failed: {0}")]
    SearchFailed(String),

    #[error("validation identity missed: expected {expected}, got {got} (tolerance {tol})")]
    ValidationFailed { expected: f64, got: f64, tol: f64 },

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("{what} too large: {size} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        size: f64,
        limit: f64,
    },
}

fn location(row: Option<usize>, col: Option<usize>) -> String {
    match (row, col) {
        (Some(r), Some(c)) => format!(" (row {r}, column {c})"),
        (Some(r), None) => format!(" (row {r})"),
        (None, Some(c)) => format!(" (column {c})"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Validation { .. }
            | Error::EmptyModel
            | Error::A1Violated
            | Error::NotIrreducible
            | Error::EmptyRecurrentSet
            | Error::InadmissibleTree { .. }
            | Error::SupportMismatch { .. }
            | Error::SupportViolation { .. }
            | Error::ShapeMismatch
            | Error::BadExponent(_) => ErrorKind::Validation,
            Error::NoConvergence { .. } | Error::SearchFailed(_) | Error::ValidationFailed { .. } => {
                ErrorKind::Numeric
            }
            Error::Overflow(_) | Error::TooLarge { .. } => ErrorKind::Resource,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation {
            msg: msg.into(),
            row: None,
            col: None,
        }
    }

    pub(crate) fn invalid_at(msg: impl Into<String>, row: usize, col: usize) -> Self {
        Error::Validation {
            msg: msg.into(),
            row: Some(row),
            col: Some(col),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
