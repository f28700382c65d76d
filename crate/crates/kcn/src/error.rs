//! Crate-wide error type and process exit-code mapping.

use thiserror::Error;

/// Every failure mode the library reports. Variants mirror the contract of the
/// operation that raises them; messages carry the offending values so CLI
/// reports stay self-contained.
#[derive(Debug, Error)]
pub enum KcnError {
    /// Parameter-set construction violated a structural invariant.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// An exponent sits exactly on A*, B* or another strict-inequality boundary.
    #[error("boundary exponent: {0}")]
    BoundaryExponent(String),
    /// (q, p) falls outside all four supported cases.
    #[error("exponent pair not covered by the case taxonomy: {0}")]
    UnsupportedExponents(String),
    /// Operation requires a different regime than the parameters classify to.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    /// Cardano hypothesis a²/4 − b³S⁴/27 > 0 fails.
    #[error("discriminant non-positive: {0}")]
    DiscriminantNonpositive(String),
    /// Normalization of the zero function requested.
    #[error("cannot normalize a function with zero L2 norm")]
    ZeroFunction,
    /// |s| exceeds the configured dilation range.
    #[error("dilation parameter s={0} exceeds s_max={1}")]
    DilationOutOfRange(f64, f64),
    /// Adaptive quadrature could not reach the entry tolerance.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    /// Two fields (or a field and a kernel) live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    /// Choquard/GN exponent outside its admissible interval.
    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),
    /// ‖u‖₂ differs from the prescribed mass beyond tolerance.
    #[error("mass mismatch: {0}")]
    MassMismatch(String),
    /// Scalar profile exponents violate the pattern a lemma requires.
    #[error("exponent pattern violated: {0}")]
    ExponentPattern(String),
    /// A hypothesis-dependent scalar structure (two zeros, …) is absent.
    #[error("condition failed: {0}")]
    ConditionFailed(String),
    /// Fiber critical-point count contradicts the active regime.
    #[error("fiber structure mismatch: {0}")]
    StructureMismatch(String),
    /// Iteration cap reached before the stopping rule fired.
    #[error("solver did not converge after {0} iterations (gradient norm {1:.3e})")]
    NotConverged(usize, f64),
    /// Coupling α exceeds the admissible threshold for the requested solve.
    #[error("threshold violated: {0}")]
    ThresholdViolated(String),
    /// Config file rejected (message carries the line number).
    #[error("config error: {0}")]
    ConfigError(String),
    /// Serialization / cache / report file problem.
    #[error("format error: {0}")]
    FormatError(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, KcnError>;

impl KcnError {
    /// Process exit code contract: 0 success, 1 verification failure,
    /// 2 regime/hypothesis mismatch, 3 non-convergence, 4 config error.
    pub fn exit_code(&self) -> i32 {
        match self {
            KcnError::ConfigError(_) | KcnError::InvalidParams(_) => 4,
            KcnError::NotConverged(_, _) => 3,
            KcnError::RegimeMismatch(_)
            | KcnError::BoundaryExponent(_)
            | KcnError::UnsupportedExponents(_)
            | KcnError::ThresholdViolated(_)
            | KcnError::DiscriminantNonpositive(_) => 2,
            _ => 1,
        }
    }
}
