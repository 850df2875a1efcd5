//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("matrix is singular to working tolerance")]
    SingularMatrix,
    #[error("matrix is not nilpotent")]
    NotNilpotent,
    #[error("pencil sF - G is singular: det(sF - G) vanishes identically")]
    SingularPencil,
    #[error("decomposition residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    IllConditioned { residual: f64, tol: f64 },
    #[error("Jordan structure detection failed: {context}")]
    StructureAmbiguous { context: String },
    #[error("operation requires exact rational arithmetic")]
    ExactModeRequired,
    #[error("pencil spectrum does not lie in the Gaussian rationals; exact structure is unavailable")]
    NonRationalEigenvalue,
    #[error("input signal derivative of order {order} is unavailable")]
    DerivativeUnavailable { order: usize },
    #[error("initial condition is inconsistent: defect {defect:.6e}")]
    InconsistentInitialCondition { defect: f64 },
    #[error("imaginary residue {magnitude:.3e} exceeds tolerance; complex modes fail to cancel")]
    ImaginaryResidue { magnitude: f64 },
    #[error("grid too coarse: need at least 3 points")]
    GridTooCoarse,
    #[error("time grid must be strictly increasing")]
    NonMonotonicGrid,
    #[error("sample history does not cover index {index}")]
    InsufficientHistory { index: i64 },
    #[error("fractional step matrix F - G is singular")]
    StepMatrixSingular,
    #[error("gamma function pole at {x}")]
    GammaPole { x: f64 },
    #[error("fractional order must satisfy 0 < n < 1 or 1 < n < 2, got {n}")]
    InvalidFractionalOrder { n: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(context: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
        }
    }
}
