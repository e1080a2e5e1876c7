use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    /// E[x* y] vanished, so the generalized SNR is undefined.
    #[error("observation is uncorrelated with the source (E[x* y] = {0:e})")]
    ZeroCorrelation(f64),

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    /// The error probability is so close to 1/2 that the closed forms are singular.
    #[error("near-singular demodulation error probability (epsilon = {0})")]
    NearSingular(f64),

    /// E_r[|E(x|r)|^2] = 0: the relay observes nothing about the source.
    #[error("degenerate channel: conditional mean carries no power")]
    DegenerateChannel,

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite sample at node {node}: {detail}")]
    NonFinite { node: String, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Configuration(msg.into())
}
