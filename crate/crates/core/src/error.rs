use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("matrix size {got} is below the minimum of {min}")]
    Dimension { got: usize, min: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("contour quadrature left an imaginary residue of {0:e}")]
    ImaginaryResidue(f64),

    #[error("decay fit needs at least {needed} positive samples, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid spectral request: {0}")]
    InvalidRequest(String),

    #[error("no admissible degree n <= {n_max} for order s = {s} (requires n >= s^16)")]
    EmptyAdmissibleRange { s: u32, n_max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
