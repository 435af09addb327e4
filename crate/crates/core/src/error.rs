use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside the range an operation accepts.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The wavefield cannot be restricted to the requested station.
    #[error("field is not restrictable at x = {x}: covector (t = {t}, xi = {xi}, tau = 0) is purely spatial")]
    NotRestrictable { x: f64, t: f64, xi: f64 },

    /// A quadrature could not certify the requested tolerance.
    #[error("quadrature tolerance {tol:e} unreachable: error bound {bound:e} ({context})")]
    ToleranceUnreachable { tol: f64, bound: f64, context: String },

    /// An iterative solver ran out of budget or hit a degenerate derivative.
    #[error("solver failed: {0}")]
    SolverFailure(String),

    /// The operation is defined only for part of the catalog.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The requested wavelet window does not fit the curve's grid.
    #[error("window not resolvable: {0}")]
    WindowNotResolvable(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
