use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("dimension mismatch at {location}: expected {expected} components, got {found}")]
    DimensionMismatch {
        location: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown vertex id {id:?} referenced by {location}")]
    UnknownVertex { id: String, location: String },

    #[error("duplicate vertex id {0:?}")]
    DuplicateVertex(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("vertex index {0} out of range")]
    VertexOutOfRange(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian: max |H - H*| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("eigensolver did not converge at k = {k:?}")]
    EigenNonConvergence { k: Vec<f64> },

    #[error("trace has imaginary part {imag:e} above tolerance {tol:e}")]
    ComplexTrace { imag: f64, tol: f64 },

    #[error("work budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("trace series covers n <= {available}, but n <= {required} is needed")]
    SeriesTruncated { available: usize, required: usize },

    #[error("no nonzero Fourier coefficient with nonzero index for n <= {0}")]
    NoWitness(usize),

    #[error("exponential polynomial is identically zero")]
    IdenticallyZero,
}

impl Error {
    /// Whether the failure comes from the input rather than the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::Io(_)
                | Error::DimensionMismatch { .. }
                | Error::UnknownVertex { .. }
                | Error::DuplicateVertex(_)
                | Error::NonFinite(_)
                | Error::InvalidGraph(_)
                | Error::VertexOutOfRange(_)
                | Error::InvalidArgument(_)
        )
    }
}
