use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("symbol a(z)+b(z) vanishes on the unit circle (min |a+b| = {min_abs:.3e})")]
    SymbolSingular { min_abs: f64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("operator not invertible: {0}")]
    NotInvertible(String),
    #[error("pole {pole} lies inside the spectrum: {reason}")]
    PoleInsideSpectrum { pole: String, reason: String },
    #[error("invalid interval [{a}, {b}]: need 0 < a < b")]
    InvalidInterval { a: f64, b: f64 },
    #[error("invalid poles: {0}")]
    InvalidPoles(String),
    #[error("rational Arnoldi breakdown: all new directions deflated")]
    Breakdown,
    #[error("projected Sylvester equation is numerically singular")]
    SingularProjection,
    #[error("Stein iteration not contractive: ||M||*||N|| = {0:.6} >= 1")]
    NotContractive(f64),
    #[error("maximum number of iterations ({0}) reached")]
    MaxIter(usize),
    #[error("unknown method '{0}'")]
    UnknownMethod(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
