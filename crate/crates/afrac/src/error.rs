//! Crate-wide error type.
//!
//! Every fallible operation reports through [`Error`]; input errors carry
//! enough context to be actionable from the command line (the binary maps
//! them to the usage exit code 1, reserving exit code 2 for runs where a
//! verified bound was violated).

use thiserror::Error;

/// Unified error type for the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// Parameters outside the documented contract of an operation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A geometric precondition (containment, convexity, regularity class)
    /// does not hold for the supplied domain/points.
    #[error("geometric precondition violated: {0}")]
    Precondition(String),

    /// The spectral measure is unusable for the requested operation
    /// (zero mass, vanishing ellipticity, atoms off the grid axes, ...).
    #[error("degenerate spectral measure: {0}")]
    DegenerateMeasure(String),

    /// The probe of the second difference near ρ = 0 is inconsistent with a
    /// twice-differentiable integrand at the evaluation point.
    #[error("integrand not C^2 at evaluation point: {0}")]
    NotC2(String),

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    QuadratureFailed(String),

    /// A ray integral is non-integrable (e.g. the boundary distance vanishes
    /// along a positive-length stretch of the ray).
    #[error("non-integrable ray integral: {0}")]
    NonIntegrable(String),

    /// The iterative linear solver stalled or diverged.
    #[error("linear solver failed: {0}")]
    SolverFailed(String),

    /// A least-squares exponent fit is impossible on the supplied data.
    #[error("exponent fit failed: {0}")]
    FitFailed(String),

    /// Configuration file / literal syntax errors.
    #[error("configuration error: {0}")]
    Config(String),

    /// Forwarded I/O errors (file exports, manifests).
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Forwarded JSON serialization errors.
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// `true` for errors that indicate bad user input (malformed literals,
    /// parameters outside contracts) rather than an internal failure; the
    /// CLI maps these to the usage exit code 1.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Precondition(_)
                | Error::DegenerateMeasure(_)
                | Error::Config(_)
        )
    }
}
