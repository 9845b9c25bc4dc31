use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numerical routines.
///
/// Variants carry enough context (offending point, residual, singular-value
/// gap) for a caller to report what went wrong without re-running anything.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point {point:?} violates the domain margin: {reason}")]
    Domain { point: Vec<(f64, f64)>, reason: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("finite-difference stencil leaves the domain margin at {point:?} (step {step:e})")]
    StepSize { point: Vec<(f64, f64)>, step: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("multiplier has no left inverse: {0}")]
    NoLeftInverse(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("symbol drops rank at {point:?}")]
    SingularPoint { point: Vec<(f64, f64)> },

    #[error("point {point:?} is outside the frame chart (|pivot det| = {det:e}, floor {floor:e})")]
    Chart { point: Vec<(f64, f64)>, det: f64, floor: f64 },

    #[error("metric is numerically singular (condition number {condition:e})")]
    MetricDegeneracy { condition: f64 },

    #[error("curvature blocks are not hermitian-paired (defect {defect:e})")]
    NonHermitian { defect: f64 },

    #[error("left-inverse certificate failed (residual {residual:e})")]
    Certificate { residual: f64 },

    #[error("decomposition degenerates at {point:?} (principal angle {angle:e})")]
    DecompositionDegeneracy { point: Vec<(f64, f64)>, angle: f64 },

    #[error("numerical rank is indeterminate (singular value {value:e} within a factor 100 of threshold {threshold:e})")]
    IndeterminateRank { value: f64, threshold: f64 },

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
