use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A rate model was evaluated outside the range where it is trusted.
    #[error("outside validity range: {0}")]
    Validity(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("port index {port} out of range for a {dim}-port network")]
    BadPort { port: usize, dim: usize },

    #[error("visibility undefined: {0}")]
    UndefinedVisibility(String),

    /// delta = 0, i.e. the octet shows no second-order interference.
    #[error("kappa undefined: second-order term delta is zero")]
    UndefinedKappa,

    /// The detected rate is at or above the saturation bound 1/tau.
    #[error("rate {rate:.6e}/s is not invertible for tau = {tau:.6e} s")]
    NonInvertible { rate: f64, tau: f64 },

    #[error("no solution found (best residual {residual:.3e})")]
    NoSolution { residual: f64 },

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("input not sorted at index {0}")]
    Unsorted(usize),

    #[error("memory guard exceeded: {0}")]
    TooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
