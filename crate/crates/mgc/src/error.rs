//! Error type shared across the crate.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed tabular input (ragged rows, blank lines).
    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    /// A cell failed to parse as a finite number.
    #[error("parse error in {path} at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    /// Dimension mismatch (non-square matrix, unequal sample counts).
    #[error("shape error: {0}")]
    Shape(String),

    /// Value outside the mathematically valid range.
    #[error("domain error: {0}")]
    Domain(String),

    /// Too few samples for the requested computation.
    #[error("size error: {0}")]
    Size(String),

    /// Invalid caller-supplied argument.
    #[error("argument error: {0}")]
    Argument(String),

    /// Overflow or other non-finite intermediate.
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
