//! Simulator for an atom-light hybrid interferometer whose atomic memory
//! builds a phase comb over repeated Raman amplification loops.

pub mod error;
pub mod fringe;
pub mod gaussian;
pub mod interferometer;
pub mod phase_comb;
pub mod sensitivity;

pub use error::{Error, Result};
pub use fringe::{FringeCurve, FringeSource};
pub use gaussian::{GaussianChannel, GaussianState, PhotonStats};
