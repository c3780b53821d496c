//! Models for designing hybrid Earth-Moon relay constellations: time and
//! frames, orbit families, lunar-surface coverage, age of information over the
//! relay network, and the scenario that turns a genome into the
//! (average AoI, coverage) objective pair.

pub mod aoi;
pub mod constants;
pub mod coverage;
mod error;
pub mod frames;
pub mod orbits;
pub mod scenario;

pub use error::{CoreError, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
