use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("structure violated in column {column}: residual {residual:.3e} (tolerance {tolerance:.3e})")]
    Structure { column: usize, residual: f64, tolerance: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
