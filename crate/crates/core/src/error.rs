use thiserror::Error;

/// Errors raised by graph construction, solvers and checks.
#[derive(Debug, Error)]
pub enum Error {
    /// A vertex, edge or function value the operation needs is missing.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition (ball size, adjacency, schedule shape) does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A configured budget was exceeded.
    #[error("resource limit: {what} needs {needed}, budget is {budget}")]
    Resource { what: String, needed: usize, budget: usize },

    /// A generator produced an asymmetric neighbor oracle.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// The Dirichlet problem has a component with no boundary contact.
    #[error("ill-posed problem: {0}")]
    IllPosed(String),

    /// An iterative method did not converge.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Bakry-Émery bracket expansion left the admissible range.
    #[error("unbounded curvature at {vertex}: |K| exceeds {limit}")]
    UnboundedCurvature { vertex: String, limit: f64 },

    /// Input file could not be parsed.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    /// A check or certificate was refused; the payload lists the reasons.
    #[error("refused: {0}")]
    Refused(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }
}
