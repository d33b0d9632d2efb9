use thiserror::Error;

/// Errors produced by the rate engine, solvers, optimizer and simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A code design violates its structural invariants.
    #[error("invalid code design: {0}")]
    InvalidDesign(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    /// Exhaustive enumeration refused because the instance is too large.
    #[error("size guard: {what} = {size} exceeds limit {limit}")]
    SizeGuard {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("divisibility violated: {0}")]
    Divisibility(String),

    #[error("evaluation budget {budget} is smaller than the base grid ({grid} points)")]
    BudgetTooSmall { budget: usize, grid: usize },

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => 2,
            Error::NonConvergence(_) => 4,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}
