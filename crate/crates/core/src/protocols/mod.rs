//! Gate-level protocols: Clifford sampling, randomized benchmarking and
//! state tomography.

pub mod channel;
pub mod clifford;
pub mod rb;
pub mod tomography;

pub use channel::GateChannel;
pub use clifford::{sample_clifford_sequence, Clifford, CliffordSequence, Layer};
pub use rb::{
    analyze, default_lengths, fit_decay, run_interleaved_rb, run_rb, run_simultaneous_rb, DecayFit, GateSet,
    InterleavedResult, RbOptions, RbResult, Simultaneous,
};
pub use tomography::{
    bell_state, prepare_bell, prepare_bell_with, project_psd, state_fidelity, state_tomography, Shots,
    TomographyResult,
};
