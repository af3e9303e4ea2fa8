//! Analytical engine and Monte Carlo cross-validator for two-tier THz/mmWave
//! hybrid networks modeled by Poisson point processes.
//!
//! The crate is layered bottom-up:
//!
//! * [`specfun`]: Gauss hypergeometric function, Lambert W and adaptive quadrature.
//! * [`antenna`]: uniform-linear-array gain and its multi-level flat-top approximation.
//! * [`channel`]: molecular absorption, pathloss, thermal noise and fading samplers.
//! * [`analysis`]: association probability, conditioned distance densities,
//!   interference Laplace transforms, coverage and spectral efficiency.
//! * [`montecarlo`]: point-process simulation of the same network, used as an
//!   independent oracle for everything in [`analysis`].

pub mod analysis;
pub mod antenna;
pub mod channel;
mod error;
pub mod montecarlo;
pub mod specfun;

pub use error::{Error, Result};

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts a ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
