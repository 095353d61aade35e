use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point ({x}, {y}) is not in the upper half-plane")]
    NotInUpperHalfPlane { x: f64, y: f64 },

    #[error("matrix determinant {det} differs from 1 by more than {tol:e}")]
    NotUnitDeterminant { det: f64, tol: f64 },

    #[error("generator {index} is invalid: {reason}")]
    InvalidGenerator { index: usize, reason: String },

    #[error("genus must be at least 2, got {0}")]
    InvalidGenus(u32),

    #[error(
        "genus {genus} needs {expected} generators (or twice that many side pairings), got {got}"
    )]
    GeneratorCount {
        genus: u32,
        expected: usize,
        got: usize,
    },

    #[error("invalid group file: {0}")]
    GroupFile(String),

    #[error("element budget exceeded: more than {cap} distinct elements")]
    BudgetExceeded { cap: usize },

    #[error("weight k must be at least 3, got {0}")]
    InvalidWeight(u32),

    #[error("element set does not contain the identity")]
    MissingIdentity,

    #[error("kernel series is degenerate (|B| = {0:e})")]
    DegenerateKernel(f64),

    #[error("kernel value must be positive, got {0}")]
    NonPositiveKernel(f64),

    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),

    #[error("basepoint grid is empty")]
    EmptyGrid,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Sym^{d} does not embed for k = {k} on genus {genus}: need 2(k-1)(g-1) > d")]
    DimsViolation { k: u32, genus: u32, d: usize },

    #[error("chart entry magnitude {0:e} exceeds 1e8; finite-difference step underflows")]
    StepUnderflow(f64),

    #[error("chart index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },
}
