use thiserror::Error;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GsbmError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("solver failed at iteration {iteration}: {source}")]
    Solver {
        iteration: usize,
        #[source]
        source: Box<GsbmError>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported fit file version `{0}`")]
    Version(String),

    #[error("truncated or malformed fit file: {0}")]
    Truncated(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GsbmError {
    fn from(e: std::io::Error) -> Self {
        GsbmError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GsbmError>;

impl GsbmError {
    pub(crate) fn shape(expected: impl Into<String>, got: impl Into<String>) -> Self {
        GsbmError::Shape {
            expected: expected.into(),
            got: got.into(),
        }
    }

    /// Whether the failure is numerical (non-convergence) rather than bad data.
    pub fn is_numerical(&self) -> bool {
        match self {
            GsbmError::Convergence { .. } => true,
            GsbmError::Solver { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
