use thiserror::Error;

/// Errors reported by the library. Numeric payloads are widened to `f64`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("expected a square matrix polynomial, got shape {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dilation must be at least {min}, got {got}")]
    InvalidDilation { got: u64, min: u64 },
    #[error("degree bound {requested} is below the invariance bound; minimal admissible K is {minimum}")]
    DegreeBelowBound { requested: usize, minimum: usize },
    #[error("enumeration of {preimages} preimages exceeds the limit {limit}")]
    EnumerationGuard { preimages: u128, limit: u128 },
    #[error("unit not bounded below: positivity floor {floor:e} is below {required:e}")]
    UnitNotBoundedBelow { floor: f64, required: f64 },
    #[error("unit is not Hermitian-valued")]
    UnitNotHermitian,
    #[error("E(l) condition not satisfied; an explicit override is required")]
    ElConditionRequired,
    #[error("vector is not fixed by m(0)/sqrt(N): residual {residual:e}")]
    NotInE1 { residual: f64 },
    #[error("digit {digit} out of range for dilation {dilation}")]
    DigitOutOfRange { digit: u64, dilation: u64 },
    #[error("path outside support: word of depth {depth} has trace mass {trace:e}")]
    PathOutsideSupport { depth: usize, trace: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
