//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors produced by validation, numerics, enumeration budgets, and I/O.
#[derive(Error, Debug)]
pub enum Error {
    /// Structural mismatch between containers that must agree in size.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A named consistency check exceeded its tolerance.
    #[error("check `{check}` failed: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    CheckFailed {
        check: String,
        residual: f64,
        tol: f64,
    },

    /// A quantity that must be a nonnegative integer was not.
    #[error("{what} = {value} is not a nonnegative integer (residual {residual:.3e})")]
    NonIntegral {
        what: String,
        value: f64,
        residual: f64,
    },

    /// A matrix expected to be a permutation matrix was not one.
    #[error("matrix is not a permutation matrix within tolerance (residual {residual:.3e})")]
    NotPermutation { residual: f64 },

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A continuation path passed within the clearance radius of a singular point.
    #[error("path point {point} at parameter {t:.6} is within clearance {clearance:.3e} of the singularity at {singular}")]
    Clearance {
        point: String,
        singular: String,
        t: f64,
        clearance: f64,
    },

    /// Adaptive stepping failed to make progress.
    #[error("step size underflow at parameter {t:.6}: {context}")]
    StepUnderflow { t: f64, context: String },

    /// A series was truncated too coarsely for the requested evaluation.
    #[error("truncation bound {bound:.3e} exceeds requested tolerance {tol:.3e}; increase cutoff")]
    Truncation { bound: f64, tol: f64 },

    /// An enumeration would exceed its configured budget.
    #[error("search space of {estimate} states exceeds budget {budget}")]
    Budget { estimate: u128, budget: u128 },

    /// Surface parameters beyond the supported range.
    #[error("surface parameter {what} = {value} exceeds the supported cap {cap}")]
    SurfaceCap {
        what: String,
        value: usize,
        cap: usize,
    },

    /// Exact series arithmetic hit a leading coefficient without a rational root.
    #[error("leading coefficient {0} is not the square of a rational")]
    NotASquare(String),

    /// Malformed series operand (zero divisor, empty series where nonzero needed).
    #[error("series error: {0}")]
    Series(String),

    /// A label name not present in the modular data.
    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    /// A malformed finite-group multiplication table.
    #[error("group table error: {0}")]
    GroupTable(String),

    /// Malformed input file contents.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
