//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Series could not be aligned on a common trading calendar.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// A series violates a domain invariant (ordering, positivity, finiteness).
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    /// A series has no usable variation (constant input, zero variance).
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    /// Too few observations for the requested operation.
    #[error("insufficient sample: {0}")]
    InsufficientSample(String),

    /// The regression design matrix is rank deficient.
    #[error("singular design matrix: {0}")]
    SingularDesign(String),

    /// Indicator neighbourhoods are empty; the bandwidth is too small for the data.
    #[error("degenerate bandwidth: {0}")]
    DegenerateBandwidth(String),

    /// A variance or ratio left its valid range due to numerical breakdown.
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    /// Simulated process parameters violate stationarity/stability constraints.
    #[error("unstable process: {0}")]
    UnstableProcess(String),

    /// A data file could not be read or parsed.
    #[error("ingestion error: {0}")]
    Ingestion(String),

    /// Window resolution failed against the loaded data range.
    #[error("window error: {0}")]
    Window(String),

    /// Invalid configuration.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
