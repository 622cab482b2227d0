use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable block `{name}` for a polynomial in {nvars} variables")]
    UnknownBlock { name: String, nvars: usize },

    #[error("inconsistent variable sets: {0}")]
    InconsistentVariables(String),

    #[error("total degree {degree} exceeds the degree cap {cap}")]
    DegreeCapExceeded { degree: u32, cap: u32 },

    #[error("polynomial is not homogeneous (found degrees {low} and {high})")]
    NotHomogeneous { low: u32, high: u32 },

    #[error("polynomial is not harmonic: its Euclidean Laplacian is nonzero")]
    NotHarmonic,

    #[error("truncation N = {given} is too small; the input needs N >= {needed}")]
    TruncationTooSmall { given: usize, needed: usize },

    #[error("block ({k}, {l}) is outside the truncation N = {n}")]
    BlockOutOfRange { k: usize, l: usize, n: usize },

    #[error("spectral data is not in the kernel of T: diagonal block ({k}, {k}) is nonzero")]
    NotInKernel { k: usize },

    #[error("no transform matrix available for degree {0}")]
    MissingTransform(usize),

    #[error("input is not supported on a single diagonal block: {0}")]
    NotBlockSupported(String),

    #[error("quadrature rule is exact to degree {have}, the integrand needs {need}")]
    QuadratureOrderTooLow { have: u32, need: u32 },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
