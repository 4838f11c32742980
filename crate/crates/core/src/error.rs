use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("CFL violation: Courant number {courant:.6} exceeds limit {limit:.6}")]
    Cfl { courant: f64, limit: f64 },

    #[error("numerical blowup: non-finite value first seen at step {step}")]
    Blowup { step: usize },

    #[error("signal side mismatch: expected {expected}, got {found}")]
    Side { expected: String, found: String },

    #[error("unknown channel mapping: {0}")]
    ChannelMapping(String),

    #[error("antenna layout: {0}")]
    Layout(String),

    #[error("measurement operator rejected: {0}")]
    Measurement(String),

    #[error("sampling: {0}")]
    Sampling(String),

    #[error("step size too large: cost increased for {consecutive} consecutive iterations (beta = {beta}); use a smaller fixed beta or line search")]
    StepSize { consecutive: usize, beta: f64 },

    #[error("problem too large for explicit assembly: {dims} dimensions exceed limit {limit}")]
    Size { dims: usize, limit: usize },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
