use thiserror::Error;

/// Broad classification used by front ends to pick an exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or inconsistent input supplied by the caller.
    Input,
    /// The physics did not cooperate: no root, no resonance, ambiguous labels.
    Physics,
    /// Numerical failure or I/O fault.
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("device config does not match the schema: {0}")]
    Schema(String),

    #[error("duplicate mode id `{0}`")]
    DuplicateMode(String),

    #[error("coupling {a}-{b} references unknown mode `{missing}`")]
    DanglingEndpoint { a: String, b: String, missing: String },

    #[error("vertical coupler `{coupler}` is placed on layer {layer}, which hosts qubits")]
    CouplerOnQubitLayer { coupler: String, layer: i32 },

    #[error("invalid mode `{id}`: {reason}")]
    InvalidMode { id: String, reason: String },

    #[error("invalid coupling {a}-{b}: {reason}")]
    InvalidCoupling { a: String, b: String, reason: String },

    #[error("invalid placement of `{id}`: {reason}")]
    InvalidPlacement { id: String, reason: String },

    #[error("invalid flux bias for `{id}`: {reason}")]
    InvalidBias { id: String, reason: String },

    #[error("mode `{0}` is not flux tunable")]
    NotTunable(String),

    #[error("unknown mode `{0}`")]
    UnknownMode(String),

    #[error("subset dimension {dim} exceeds the dense limit of {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("eigensolver failed for a {dim}x{dim} matrix: {reason}")]
    Eigensolver { dim: usize, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("labeling is ambiguous near a resonance: state {state} has best overlap {overlap:.3}")]
    NearResonance { state: String, overlap: f64 },

    #[error("no sign change of ZZ in [{lo}, {hi}]: zeta = {zeta_lo:.6} MHz and {zeta_hi:.6} MHz")]
    NoSignChange {
        lo: f64,
        hi: f64,
        zeta_lo: f64,
        zeta_hi: f64,
    },

    #[error("no convergence within {evaluations} evaluations: {detail}")]
    NoConvergence { evaluations: usize, detail: String },

    #[error("qubits never become resonant: {0}")]
    NotResonant(String),

    #[error("perturbative formula invalid: |detuning| {detuning_mhz:.1} MHz < 5 g = {limit_mhz:.1} MHz")]
    PerturbativeInvalid { detuning_mhz: f64, limit_mhz: f64 },

    #[error("norm drift {0:.3e} exceeds tolerance; reduce the time step")]
    NormDrift(f64),

    #[error("trace drift {0:.3e} exceeds tolerance")]
    TraceDrift(f64),

    #[error("density matrix has eigenvalue {0:.3e} below tolerance")]
    NegativeEigenvalue(f64),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("couplings are not equalized: oscillation frequencies {frequencies_mhz:?} MHz")]
    NotEqualized { frequencies_mhz: Vec<f64> },

    #[error("target coupling unreachable: {0}")]
    Unreachable(String),

    #[error("decay fit failed: {0}")]
    Fit(String),

    #[error("unphysical interleaved ratio: p_interleaved {interleaved:.6} > p_reference {reference:.6}")]
    UnphysicalRatio { interleaved: f64, reference: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            Schema(_)
            | DuplicateMode(_)
            | DanglingEndpoint { .. }
            | CouplerOnQubitLayer { .. }
            | InvalidMode { .. }
            | InvalidCoupling { .. }
            | InvalidPlacement { .. }
            | InvalidBias { .. }
            | NotTunable(_)
            | UnknownMode(_)
            | DimensionTooLarge { .. }
            | InvalidInput(_)
            | Json(_) => ErrorKind::Input,
            NearResonance { .. }
            | NoSignChange { .. }
            | NoConvergence { .. }
            | NotResonant(_)
            | PerturbativeInvalid { .. }
            | Calibration(_)
            | NotEqualized { .. }
            | Unreachable(_)
            | Fit(_)
            | UnphysicalRatio { .. } => ErrorKind::Physics,
            Eigensolver { .. } | NormDrift(_) | TraceDrift(_) | NegativeEigenvalue(_) | Io(_) => {
                ErrorKind::Internal
            }
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
