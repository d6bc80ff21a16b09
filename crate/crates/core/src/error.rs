use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coincident points: the kernel is singular at x = y")]
    CoincidentPoints,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("particles {first} and {second} overlap (gap {gap:.6e})")]
    Overlap {
        first: usize,
        second: usize,
        gap: f64,
    },

    #[error("boundary condition mismatch: {0}")]
    BoundaryCondition(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("scene file: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
