//! Electromagnetic energy flow behind N-slit diffraction gratings.
//!
//! The crate evaluates the scalar diffracted field of a plane wave behind
//! an amplitude grating (a truncated superposition of transverse modes),
//! assembles the time-averaged Poynting vector and energy density for an
//! arbitrary incident polarization, integrates energy flow lines through
//! the planar direction field, and accumulates Monte Carlo single-photon
//! arrival histograms that converge to the energy density.
//!
//! Entry points:
//! - [`spectrum::GratingSpec`] - grating geometry and derived scales.
//! - [`wavefield::FieldEvaluator`] - psi and its derivatives anywhere in
//!   the forward half-plane, with [`wavefield::fresnel_oracle`] as an
//!   independent closed-form cross-check.
//! - [`poynting`] - S, U and the polarization decomposition.
//! - [`flowline`] - adaptive Runge-Kutta streamline integration.
//! - [`ensemble`] - seeded random launches, arrival histograms and their
//!   comparison against the energy density.

pub mod ensemble;
pub mod error;
pub mod flowline;
pub mod fresnel;
pub mod poynting;
pub mod quadrature;
pub mod spectrum;
pub mod wavefield;

pub use error::{Error, Result};
pub use flowline::{IntegratorConfig, Termination, Trajectory};
pub use poynting::{Polarization, PoyntingSample};
pub use quadrature::{QuadratureConfig, Scheme};
pub use spectrum::GratingSpec;
pub use wavefield::{FieldEvaluator, FieldSample};
