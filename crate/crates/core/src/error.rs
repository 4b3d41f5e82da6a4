use std::fmt;

/// Errors raised anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Two operands disagree on a dimension.
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: String,
        actual: String,
    },

    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A value that must be finite was NaN or infinite. `what` names the
    /// offending parameter tensor or objective term.
    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    /// A per-step failure surfaced from inside the training loop.
    #[error("training failed at epoch {epoch}, batch {batch}: {source}")]
    Training {
        epoch: usize,
        batch: usize,
        #[source]
        source: Box<Error>,
    },

    /// Numerical breakdown, e.g. every mixture component has zero mass.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Malformed input file. `location` is a byte offset or a row number.
    #[error("format error at {location}: {message}")]
    Format { location: Location, message: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Position inside a malformed input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Byte(u64),
    Row(usize),
    Header,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Byte(offset) => write!(f, "byte {offset}"),
            Location::Row(row) => write!(f, "row {row}"),
            Location::Header => write!(f, "header"),
        }
    }
}

impl Error {
    pub(crate) fn shape(context: &'static str, expected: impl fmt::Display, actual: impl fmt::Display) -> Self {
        Error::Shape {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn non_finite(what: impl Into<String>) -> Self {
        Error::NonFinite { what: what.into() }
    }

    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape { .. } => "shape",
            Error::Domain(_) => "domain",
            Error::NonFinite { .. } => "non-finite",
            Error::Training { .. } => "training",
            Error::Numerical(_) => "numerical",
            Error::Config(_) => "config",
            Error::Format { .. } => "format",
            Error::Csv(_) => "csv",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
