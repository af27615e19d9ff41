use std::fmt;

use serde::Serialize;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Error kinds shared by every module of the engine.
///
/// Each variant maps to a stable machine code (see [`Error::code`]) that the
/// service and CLI surface to clients.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown attribute `{0}`")]
    Name(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("selection refers to dataset version {selection}, current is {dataset}")]
    StaleSelection { selection: u64, dataset: u64 },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("dataset is empty: {0}")]
    EmptyDataset(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("{0}")]
    Parse(ParseError),
    #[error("type error: {0}")]
    Type(String),
    #[error("invalid state: {0}")]
    State(String),
    #[error("state version conflict: expected {expected}, current is {actual}")]
    Conflict { expected: u64, actual: u64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Name(_) => "NameError",
            Error::NotFound(_) => "NotFoundError",
            Error::StaleSelection { .. } => "StaleSelectionError",
            Error::Schema(_) => "SchemaError",
            Error::EmptyDataset(_) => "EmptyDatasetError",
            Error::Config(_) => "ConfigError",
            Error::EmptyInput(_) => "EmptyInputError",
            Error::Numeric(_) => "NumericError",
            Error::InsufficientData(_) => "InsufficientDataError",
            Error::Parse(_) => "ParseError",
            Error::Type(_) => "TypeError",
            Error::State(_) => "StateError",
            Error::Conflict { .. } => "ConflictError",
            Error::Io(_) => "IoError",
            Error::Csv(_) => "CsvError",
            Error::Json(_) => "JsonError",
        }
    }

    /// True for errors caused by the caller's input rather than by the
    /// environment (used for CLI exit codes and HTTP 400 vs 500).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Io(_) | Error::Numeric(_) => false,
            Error::Csv(e) => !e.is_io_error(),
            _ => true,
        }
    }
}

/// Syntax error in a selection query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseError {
    /// Character offset of the offending token (input length at end of input).
    pub position: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at position {}: expected {}, found {}",
            self.position,
            self.expected.join(" or "),
            self.found
        )
    }
}
