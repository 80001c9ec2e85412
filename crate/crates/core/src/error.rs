use thiserror::Error;

#[derive(Debug, Error)]
pub enum LeoError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not hermitian (max |M - M^dag| = {0:e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (||M^dag M - I||_F = {0:e})")]
    NotUnitary(f64),

    #[error("operator is not diagonal")]
    NotDiagonal,

    #[error("non-finite matrix entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("hermitian eigendecomposition did not converge")]
    EigenDecomposition,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a projective logical involution: {0}")]
    NotLogicalInvolution(String),

    #[error("not a generalized-LEO generator: {0}")]
    NotGeneralizedGenerator(String),

    #[error("state is not in the code subspace (||Q psi|| = {0:e})")]
    NotInCode(f64),

    #[error("code mismatch: pulses target `{pulses}` but model uses `{model}`")]
    CodeMismatch { pulses: String, model: String },

    #[error("unknown code label `{label}` (valid: {valid})")]
    UnknownCode { label: String, valid: String },

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

impl LeoError {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            LeoError::EigenDecomposition | LeoError::NotUnitary(_) | LeoError::NonFinite(..)
        )
    }
}

pub type Result<T> = std::result::Result<T, LeoError>;
