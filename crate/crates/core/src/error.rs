use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("inadmissible inhomogeneity profile: {0}")]
    InadmissibleProfile(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid vortex position: {0}")]
    InvalidPosition(String),

    /// `e^u` would overflow a double.
    #[error("divergent field: u = {value} at node {node} exceeds the exponential range")]
    DivergentField { node: usize, value: f64 },

    #[error("comparison refused: {0}")]
    ComparisonRefused(String),
}

pub type Result<T> = std::result::Result<T, Error>;
