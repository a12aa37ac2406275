//! Time-dependent simulation: flux schedules, closed and open evolution,
//! and the two-qubit and three-qubit experiments built on them.

pub mod chevron;
pub mod cz;
pub mod evolve;
mod pair;
pub mod wstate;
pub mod schedule;
pub mod state;

pub use evolve::{evolve_lindblad, evolve_lindblad_with, evolve_unitary, propagator, LindbladMethod};
pub use schedule::{FluxSchedule, Segment};
pub use state::{DensityState, ModeNoise, NoiseSpec, QuantumState};
pub use chevron::{chevron_scan, ChevronMap, ChevronOptions};
pub use cz::{calibrate_cz, cz_gate, gate_fidelity, ideal_cz, CzCalibration, CzOptions, GateFidelity, DEFAULT_CZ_COUPLER_FLUX};
pub use wstate::{equalize_couplings, wstate_evolution, EqualizeOptions, Equalization, WStateOptions, WStateResult};
