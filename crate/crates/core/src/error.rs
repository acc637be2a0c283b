use thiserror::Error;

/// Errors raised by the workbench.
///
/// Variants name the violated contract so that callers (and the experiment
/// runner) can report which invariant failed.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("operator is not positive (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("effect spectrum outside [0, 1]: [{min:e}, {max:e}]")]
    NotAnEffect { min: f64, max: f64 },

    #[error("effects do not sum to the identity (max deviation {0:e})")]
    NotNormalized(f64),

    #[error("invalid gemenge: {0}")]
    InvalidGemenge(String),

    #[error("operators do not commute (commutator norm {0:e})")]
    NonCommuting(f64),

    #[error("zero variance divisor")]
    ZeroVariance,

    #[error("negative variance radicand {0:e}")]
    NegativeVariance(f64),

    #[error("value {value} outside admissible range ({min}, {max})")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("unknown outcome label {0:?}")]
    UnknownOutcome(Vec<f64>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vector is not normalized (norm {0})")]
    NotNormalizedVector(f64),

    #[error("Pauli exclusion: symmetrized vector vanishes")]
    PauliExclusion,

    #[error("region mask is empty")]
    EmptyMask,

    #[error("region masks overlap")]
    OverlappingMasks,

    #[error("cells overlap or do not cover the lattice: {0}")]
    InvalidCells(String),

    #[error("orthogonality conditions violated (max deviation {0:e})")]
    OrthogonalityViolated(f64),

    #[error("Pauli-blocked trigger configuration for detector {detector}: tr[W_kk] = {trace:e}")]
    PauliBlocked { detector: usize, trace: f64 },

    #[error("grid aliasing: {0:e} of the mass sits near the momentum boundary")]
    Aliasing(f64),

    #[error("Fock cutoff did not converge (moment shift {0:e} on doubling)")]
    CutoffNotConverged(f64),

    #[error("cutoff {cutoff} leaves a geometric tail of {tail:e}")]
    TailTooLarge { cutoff: usize, tail: f64 },

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
