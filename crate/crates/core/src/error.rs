use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operation requires a {expected} probe")]
    WrongProbeClass { expected: &'static str },

    #[error("sector basis has L = {basis}, probe has L = {probe}")]
    BasisMismatch { basis: usize, probe: usize },

    #[error("matrix is not symmetric: |H[{row}][{col}] - H[{col}][{row}]| = {deviation:e}")]
    NotSymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("eigensolver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("state index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("target state {target} is degenerate with states {multiplet:?}")]
    DegenerateState { target: usize, multiplet: Vec<usize> },

    #[error("eigenstate overlap {overlap:.3} across [h - dh, h + dh] with dh = {dh:e}; level crossing suspected, use a smaller dh")]
    LevelCrossing { overlap: f64, dh: f64 },

    #[error("finite-difference estimates disagree: F(dh) = {coarse:e}, F(dh/2) = {fine:e}")]
    FiniteDifferenceMismatch { coarse: f64, fine: f64 },

    #[error("maximum lies on the grid boundary at index {index}; widen the grid to bracket the peak")]
    PeakOnBoundary { index: usize },

    #[error("fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("non-positive value {value:e} at position {index} cannot enter a log-space fit")]
    NonPositive { index: usize, value: f64 },

    #[error("negative quantum Fisher information {value:e} beyond round-off")]
    NegativeQfi { value: f64 },

    #[error("time series does not cover t = {missing}")]
    CoverageGap { missing: f64 },

    #[error("near-singular denominator {value:e} in geometric-series closed form")]
    SingularDenominator { value: f64 },

    #[error("at h = {h:e}: {source}")]
    AtField {
        h: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
