//! Numerical laboratory for the inverse scattering transform of small-data KPII.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`], [`spectral`]: lattices, the continuous-FT contract, the ξ↔ζ maps and the phase S₀.
//! * [`oscillatory`]: Airy, Fresnel, cubic-phase closed forms and stationary phase.
//! * [`forward`]: the eigenfunction m₀ at x₃ = 0 and the scattering data s_c.
//! * [`inverse`]: the operators T and 𝒞, the Neumann solve and the reconstruction of u.
//! * [`asymptotics`]: cone frames, the leading-order formula, direct oscillatory u₁ and decay fits.
//! * [`representation`]: the x′/ξ″ representation of 𝒞T1 and its cross-check.
//! * [`direct`]: an ETDRK4 pseudo-spectral KPII solver used as an independent reference.
//! * [`io`], [`config`], [`pipeline`], [`acceptance`]: persistence, configuration and experiments.

pub mod acceptance;
pub mod asymptotics;
pub mod config;
pub mod direct;
pub mod error;
pub mod filon;
pub mod forward;
pub mod inverse;
pub mod io;
pub mod lattice;
pub mod oscillatory;
pub mod pipeline;
pub mod quad;
pub mod representation;
pub mod spectral;

pub use error::{KpError, Result};
pub use num_complex::Complex64 as C64;

/// 2π, used everywhere in phases.
pub const TAU: f64 = 2.0 * std::f64::consts::PI;
