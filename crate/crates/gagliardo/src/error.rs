//! Error type shared by every module in the crate.

use std::fmt;
use std::io;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
///
/// Numerical routines never panic on bad user input; they return one of
/// these variants with enough context to locate the offending value.
#[derive(Debug)]
pub enum Error {
    /// Structurally malformed input: negative values, mismatched lengths,
    /// unsupported shape combinations.
    InvalidInput(String),
    /// Input outside the mathematical domain of an operation: a point not
    /// in the set, a parameter violating a theorem hypothesis.
    OutOfDomain(String),
    /// A computation that started from valid input failed to produce a
    /// representable result (divergence, exhausted refinement budget).
    Numerical(String),
    /// Underlying I/O failure while reading or writing artifacts.
    Io(io::Error),
    /// Malformed file content (CSV, JSON, binary layouts).
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::OutOfDomain(msg) => write!(f, "out of domain: {msg}"),
            Error::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            Error::Io(err) => write!(f, "i/o error: {err}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(err: io::Error) -> Self {
        Error::Io(err)
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
