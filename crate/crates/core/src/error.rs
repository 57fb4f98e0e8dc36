use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid grid {ni}x{nj} with {dof} unknowns per node")]
    InvalidGrid { ni: usize, nj: usize, dof: usize },

    #[error("empty input vector")]
    EmptyInput,

    #[error("index set is empty")]
    EmptySet,

    #[error("directional derivative requested along a zero vector")]
    ZeroDirection,

    #[error("residual evaluation produced non-finite values")]
    ResidualOverflow,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
