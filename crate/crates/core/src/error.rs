use thiserror::Error;

/// Every fallible operation in the crate reports through this type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("target qubits must be distinct, got {0:?}")]
    DuplicateTargets(Vec<usize>),
    #[error("matrix is not unitary: max deviation from identity {deviation:.3e}")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not Hermitian: max deviation {deviation:.3e}")]
    NotHermitian { deviation: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state is not normalized: squared norm {norm:.12}")]
    NotNormalized { norm: f64 },
    #[error("value out of domain: {0}")]
    Domain(String),
    #[error("unknown or consumed register handle #{0}")]
    UnknownRegister(u64),
    #[error("causality violation: emission at {emit} precedes trigger time {now}")]
    Causality { emit: f64, now: f64 },
    #[error("prover position is not enclosed by the verifiers")]
    NotEnclosed,
    #[error("degenerate verifier layout: {0}")]
    Degenerate(String),
    #[error("adversary {index} lies within delta = {delta} of the prover position")]
    TooClose { index: usize, delta: f64 },
    #[error("strategy needs {pairs} pre-shared EPR pairs, which the No-PE model forbids")]
    EntanglementForbidden { pairs: usize },
    #[error("INQC did not succeed within the round cap")]
    InqcFailed,
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { field: field.into(), reason: reason.into() }
    }
}
