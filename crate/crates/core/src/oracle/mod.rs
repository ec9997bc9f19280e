//! Brute-force validators for the closed-form propagator.
//!
//! [`integrator`] integrates the second-order time-convolutionless master
//! equation numerically in operator form; [`quadrature`] rebuilds the decay
//! rates from the Lorentzian reservoir spectrum. Neither path touches the
//! propagator coefficients.

pub mod integrator;
pub mod quadrature;

pub use integrator::{integrate_pair, integrate_single, IntegratorConfig, Trajectory};
pub use quadrature::{adaptive_simpson, rate_from_spectral_density, spectral_density};
