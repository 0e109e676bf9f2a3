//! Holographic beamforming with recordable-and-reconfigurable metasurfaces.
//!
//! The crate models the full chain: a user's multipath waves interfere with
//! the surface reference wave, per-element power sensors record the
//! interference power (the hologram), the hologram is reindexed and
//! post-processed into amplitude weights, and the weighted surface then
//! beamforms the downlink. Far-field patterns, an equivalent discrete-time
//! Toeplitz channel, mutual information and Monte-Carlo outage probability
//! are provided to evaluate the result against a perfect-CSI holographic
//! surface baseline.
//!
//! Module map:
//!
//! - [`surface`]: geometry, reference wave, steering vectors, object fields
//! - [`channel`]: resolvable-path channels (manual, Rician ensemble, CDL tables)
//! - [`holography`]: recording, reindexing, weights, reconstruction, baseline
//! - [`beampattern`]: array factor, peak search, sidelobe statistics
//! - [`link`]: pulses, equivalent taps, Toeplitz channel, MI, outage
//! - [`harness`]: JSON configs, presets, CSV results, invariant suite

pub mod beampattern;
pub mod channel;
mod error;
pub mod grid;
pub mod harness;
pub mod holography;
pub mod link;
pub mod numfmt;
pub mod rng;
pub mod surface;

pub use error::{Error, Result};
pub use grid::Grid;
pub use num_complex::Complex64;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
