use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (LFSR taps, basis count, seed, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A desk-scale guard refused an enumeration or search that is too large.
    #[error("scale guard: {0}")]
    ScaleGuard(String),

    /// Quadrature, root finding or truncation did not meet its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
}
