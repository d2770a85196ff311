//! Simulation toolkit for three-path interference tests with single-photon
//! detectors.

pub mod campaign;
pub mod cli;
pub mod config;
pub mod detector;
pub mod error;
pub mod fixtures;
pub mod formats;
pub mod interference;
pub mod optics;
pub mod rng;
pub mod source;
pub mod stats;

pub use error::{Error, Result};
