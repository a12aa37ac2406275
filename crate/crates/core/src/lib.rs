//! Numerical simulator and calibration harness for stacked transmon
//! processors in which qubits couple through flux-tunable planar and
//! vertical couplers.
//!
//! Layers, bottom up:
//! - [`device`]: parametric device model and its JSON config format.
//! - [`hilbert`]: truncated multi-mode Hamiltonians and labeled spectra.
//! - [`statics`]: coupler spectra, residual ZZ and its zeros, effective coupling.
//! - [`dynamics`]: flux schedules, unitary/Lindblad evolution, chevrons,
//!   CZ calibration and the W-state experiment.
//! - [`protocols`]: Clifford sampling, randomized benchmarking, tomography.
//! - [`topology`]: stacked-chip connectivity graphs.

pub mod device;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod hilbert;
pub mod linalg;
mod optimize;
pub mod protocols;
pub mod seed;
pub mod statics;
pub mod topology;

pub use error::{Error, ErrorKind, Result};

pub type C64 = num_complex::Complex64;

/// Conversion from linear frequency (GHz) to angular frequency (rad/ns).
pub const TWO_PI: f64 = std::f64::consts::TAU;
