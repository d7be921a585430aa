//! Beam-pair self-interference modelling for full-duplex phased-array
//! transceivers: geometry, beamforming, near-field channel, INR grids,
//! spatial neighborhood statistics and fitted statistical models.

pub mod beamforming;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod linkmath;
pub mod models;
pub mod neighborhood;
pub mod stats;

pub use error::{Error, Result};
