//! Crate-wide error type.
//!
//! Numeric failure modes (singular pivots, branch cuts, divergent iterations,
//! failed frame constructions) are data-dependent and reported through
//! `Result`. Shape and index mismatches are programming errors and panic at
//! the call site instead.

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("jet value part {0:.3e} is below the singularity tolerance")]
    NearSingular(f64),

    #[error("jet square root needs a value with positive real part, got {0}")]
    BranchCut(Complex64),

    #[error("matrix is singular or too ill-conditioned to invert (pivot ratio {0:.3e})")]
    SingularMatrix(f64),

    #[error("matrix value part is not positive definite")]
    NotPositiveDefinite,

    #[error("square-root iteration did not converge within {0} steps")]
    NoConvergence(usize),

    #[error("projector rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("point lies outside the chart domain box (coordinate {index}: {value})")]
    DomainViolation { index: usize, value: f64 },

    #[error("chart validation failed: invariant `{invariant}` has residual {residual:.3e}")]
    ValidationFailed { invariant: String, residual: f64 },

    #[error("frame construction residual {worst:.3e} exceeds tolerance: {detail}")]
    ConstructionFailed { worst: f64, detail: String },

    #[error("input field is not of type (1,0) at the base point (residual {0:.3e})")]
    NotType10(f64),

    #[error("malformed chart descriptor: {0}")]
    MalformedDescriptor(String),

    #[error("unknown chart `{0}`")]
    UnknownChart(String),

    #[error("unknown suite `{0}` (expected STRUCTURE, IDENTITIES, FRAMES or INTEGRABILITY)")]
    UnknownSuite(String),

    #[error("chart `{chart}` is not eligible for suite {suite}: {reason}")]
    ChartNotEligible {
        chart: String,
        suite: String,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
