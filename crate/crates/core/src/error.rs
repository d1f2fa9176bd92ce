use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// Vertex indices carried by error variants are 1-based, matching the
/// edge-list format and the reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    Validation(String),

    #[error("graph is disconnected: vertex {unreachable} cannot be reached from vertex 1")]
    Disconnected { unreachable: usize },

    #[error("vertex index {index} out of range for a graph with {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular (pivot {pivot} has magnitude {magnitude:e})")]
    Singular { pivot: usize, magnitude: f64 },

    #[error("matrix is not symmetric: |m[{row}][{col}] - m[{col}][{row}]| = {difference:e}")]
    NotSymmetric {
        row: usize,
        col: usize,
        difference: f64,
    },

    #[error("iteration did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("numeric overflow in {0}")]
    Overflow(&'static str),

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("parameter {param} outside the open domain ({low}, {high}) of {measure}")]
    ParameterOutOfDomain {
        measure: String,
        param: f64,
        low: f64,
        high: f64,
    },

    #[error("entry [{row}][{col}] = {value:e} is not strictly positive")]
    NonPositiveEntry { row: usize, col: usize, value: f64 },

    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),

    #[error("unknown property `{0}`")]
    UnknownProperty(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("embedding reproduces the squared distances only within {error:e}")]
    Reconstruction { error: f64 },

    #[error("property `{property}` has the same status ({holds}) at both ends of the range")]
    SameStatusAtEndpoints { property: String, holds: bool },
}

pub type Result<T> = std::result::Result<T, Error>;
