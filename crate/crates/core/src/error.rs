use thiserror::Error;

pub type Result<T> = std::result::Result<T, WgqedError>;

/// Broad classification used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum WgqedError {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid mode index {family} ({m}, {n}): {reason}")]
    InvalidMode {
        family: &'static str,
        m: u32,
        n: u32,
        reason: &'static str,
    },

    #[error("point ({x}, {y}) lies outside the cross section [0, {a}] x [0, {b}]")]
    OutsideCrossSection { x: f64, y: f64, a: f64, b: f64 },

    #[error("k0 = {k0} coincides with the cutoff of {mode} (cutoff {cutoff}); choose a frequency away from the cutoffs")]
    AtCutoff { mode: String, cutoff: f64, k0: f64 },

    #[error("k0 = {k0} is below the TE10 cutoff {cutoff}; no guided mode propagates")]
    BelowCutoff { k0: f64, cutoff: f64 },

    #[error("atom {id} at ({x}, {y}) must lie strictly inside the cross section")]
    AtomOnWall { id: usize, x: f64, y: f64 },

    #[error("atoms {first} and {second} occupy the same point")]
    CoincidentAtoms { first: usize, second: usize },

    #[error("atoms {first} and {second} are separated by |dz| = {dz} < min_axial_separation = {min}; evanescent sums do not converge absolutely")]
    AxialSeparation {
        first: usize,
        second: usize,
        dz: f64,
        min: f64,
    },

    #[error(
        "atoms {first} and {second} share z; sign(z_j - z_i) is undefined for the TM cross terms"
    )]
    SignAmbiguity { first: usize, second: usize },

    #[error("invalid Zeeman sublevel m_J = {0}; expected -1, 0 or +1")]
    InvalidSublevel(i32),

    #[error("invalid truncation policy: {0}")]
    Truncation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid time grid: {0}")]
    TimeGrid(String),

    #[error("invalid initial state: {0}")]
    InitialState(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("evanescent sum between atoms {first} and {second} needs more than max_terms = {max_terms} terms; increase max_terms or the axial separation")]
    TruncationExhausted {
        first: usize,
        second: usize,
        max_terms: usize,
    },

    #[error("fit did not converge after {iterations} iterations (residual trace: {trace:?})")]
    FitNotConverged { iterations: usize, trace: Vec<f64> },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl WgqedError {
    pub fn class(&self) -> ErrorClass {
        match self {
            WgqedError::TruncationExhausted { .. }
            | WgqedError::FitNotConverged { .. }
            | WgqedError::Numerical(_) => ErrorClass::Numerical,
            WgqedError::Io(_) => ErrorClass::Io,
            _ => ErrorClass::Validation,
        }
    }
}
