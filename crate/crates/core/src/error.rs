use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    /// A scalar function applied through the spectrum produced a non-finite
    /// value at this eigenvalue.
    #[error("function undefined on eigenvalue {0:e}")]
    Domain(f64),

    /// The 1-fragility diverges once the state has a (numerically) zero
    /// eigenvalue; the offending eigenvalue is carried along.
    #[error("near-pure divergence: eigenvalue {eigenvalue:e} is below the floor {floor:e}")]
    NearPureDivergence { eigenvalue: f64, floor: f64 },

    #[error("imaginary residue {0:e} in a trace that must be real")]
    ImaginaryResidue(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown diagnostic `{0}`")]
    UnknownDiagnostic(String),

    #[error("truncation did not converge up to dimension {max_dim} (last deviation {deviation:e})")]
    Truncation { max_dim: usize, deviation: f64 },

    #[error("non-finite sample at t = {0}")]
    NonFiniteSample(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
