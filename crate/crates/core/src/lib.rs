//! Synthetic near-field scans of thin-wire radiators over a ground plane,
//! and pixel classifiers that tell closed loops from open wires.
//!
//! The pipeline runs geometry → mesh → method-of-moments currents →
//! near-field map → grayscale image → classifier → leave-one-out report.

pub mod classifiers;
pub mod error;
pub mod evaluation;
pub mod field;
pub mod geometry;
pub mod imaging;
pub mod mom;
pub mod pipeline;

pub use error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permeability (H/m).
pub const MU_0: f64 = 4.0e-7 * std::f64::consts::PI;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 1.0 / (MU_0 * SPEED_OF_LIGHT * SPEED_OF_LIGHT);

/// Recorded in every manifest so artifacts can be traced to the code.
pub const PIPELINE_VERSION: &str = concat!("nfscan-", env!("CARGO_PKG_VERSION"));
