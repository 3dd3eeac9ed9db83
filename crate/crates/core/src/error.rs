use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    /// Smallest singular value of an environment fell below the degeneracy threshold.
    #[error("degenerate environment: smallest singular value {sigma_min:e} is below {threshold:e}")]
    DegenerateEnvironment { sigma_min: f64, threshold: f64 },

    #[error("matrix is not special unitary: |det - 1| = {det_error:e}, unitarity error {unitarity_error:e}")]
    NotSpecialUnitary { det_error: f64, unitarity_error: f64 },

    #[error("matrix is not unitary: max |U^dag U - I| = {0:e}")]
    NotUnitary(f64),

    #[error("invalid skeleton: {0}")]
    InvalidSkeleton(String),

    #[error("parameter count {found} does not match skeleton slot count {expected}")]
    ParamCountMismatch { expected: usize, found: usize },

    #[error("one-factorization needs an even number of qubits (got {0}); use the star, line or sequential generators for odd n")]
    OddQubitCount(usize),

    #[error("normalization is only defined for full dressing")]
    NormalizeSupportOnly,

    #[error("skeleton has a layer with {0} CNOTs; the combinatorial counter needs one CNOT per layer")]
    MultiCnotLayer(usize),

    #[error("parameter budget exceeded: {params} angles > budget {budget}")]
    BudgetExceeded { params: usize, budget: usize },

    #[error("unsupported circuit document version {0} (expected 1)")]
    UnsupportedVersion(u64),

    #[error("malformed document: field `{field}`: {reason}")]
    Malformed { field: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
