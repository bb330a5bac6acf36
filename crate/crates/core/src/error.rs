use thiserror::Error;

/// Errors raised by the force engines and their numerical backbone.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DispersiaError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation landed exactly on a pole of a response function.
    #[error("singularity: {0}")]
    Singularity(String),

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("integration did not converge in {context}: partial value norm {value_norm:.6e}, error estimate {error:.3e}")]
    Integration {
        context: String,
        value_norm: f64,
        error: f64,
    },

    /// A non-finite number showed up where a finite one was required.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    /// The requested parameters describe an unstable or unphysical system.
    #[error("physical regime error: {0}")]
    PhysicalRegime(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    /// The leading low-velocity order vanishes, so a cubic law does not apply.
    #[error("leading order vanishes, higher-order regime: {0}")]
    HigherOrderRegime(String),
}

pub type Result<T> = std::result::Result<T, DispersiaError>;
