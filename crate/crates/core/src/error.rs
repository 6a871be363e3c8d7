use thiserror::Error;

/// Errors surfaced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: |M[{row},{col}] - conj(M[{col},{row}])| = {delta:.3e}")]
    NotHermitian { row: usize, col: usize, delta: f64 },

    #[error("matrix is singular (infinite condition number)")]
    SingularMatrix,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector is not unit norm: |v| = {norm}")]
    NotUnit { norm: f64 },

    #[error("near-zero vector cannot be normalized (norm = {norm:.3e})")]
    ZeroVector { norm: f64 },

    #[error("dimension {dim} is not a power of two >= 2")]
    NotPowerOfTwo { dim: usize },

    #[error("condition number target {kappa} must be >= 1")]
    BadKappa { kappa: f64 },

    #[error("schedule parameter s = {s} outside [0, 1]")]
    ScheduleParamOutOfRange { s: f64 },

    #[error("schedule guard violated: dt * max |H(s)| = {product} > 0.5")]
    ScheduleGuard { product: f64 },

    #[error("matrix entry ({row},{col}) = {value} exceeds unit magnitude")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },

    #[error("qubit index {index} out of range for {qubits}-qubit register")]
    QubitOutOfRange { index: usize, qubits: usize },

    #[error("state does not satisfy the real/imaginary split: max violation {max_violation:.3e}")]
    FormViolation { max_violation: f64 },

    #[error("vanishing post-selection probability ({probability:.3e}) at step {step}")]
    VanishingPostSelection { step: usize, probability: f64 },

    #[error("diagonal blocks of the interpolated Hamiltonian are nonzero (max {max_entry:.3e})")]
    NonzeroDiagonalBlock { max_entry: f64 },

    #[error("imaginary residual {residual:.3e} exceeds the truncation threshold; modify T, dt")]
    TruncationRejected { residual: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
