//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by the simulation primitives.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A grating or configuration parameter violates its domain constraint.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Field evaluation was requested behind the grating plane.
    #[error("propagation distance must be non-negative, got y = {y}")]
    BackwardPropagation { y: f64 },

    /// The closed-form propagated field is only defined strictly past the grating.
    #[error("closed-form propagation requires y > 0, got y = {y}")]
    NonPositiveDistance { y: f64 },

    /// A flow line was launched outside every slit aperture.
    #[error("launch point x0 = {x0} lies outside all slit apertures")]
    LaunchOutsideAperture { x0: f64 },

    /// Flow-line integration requires a linearly polarized incident wave.
    #[error("flow lines are only defined for linear polarization (phase 0 or \u{3c0}, or a single component)")]
    NonLinearPolarization,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
