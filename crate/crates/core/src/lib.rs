//! Behavioral simulator and evaluation toolkit for a capacitive multi-level
//! CAM that performs approximate string matching of DNA reads.
//!
//! The crate is organised bottom-up:
//!
//! * [`genome`]: sequences, reference segmentation, read extraction and edit
//!   injection.
//! * [`oracle`]: exact Hamming and edit distances used as ground truth.
//! * [`cam`]: the array model (ED*/HD cell logic, matchline voltage with
//!   capacitor mismatch, sense amplifier, energy, readout resolution).
//! * [`correction`]: Hamming-distance aid correction and threshold-aware
//!   sequence rotation.
//! * [`eval`]: confusion matrices, F1, full experiment runs and noise sweeps.
//! * [`config`]: the flat `section.key = value` run configuration.

pub mod cam;
pub mod config;
pub mod correction;
pub mod error;
pub mod eval;
pub mod genome;
pub mod oracle;
pub mod plot;
pub mod rng;

pub use error::{Error, Result};
