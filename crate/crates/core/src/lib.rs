//! Chart-level numerical toolkit for almost-Kähler geometry: truncated jet
//! arithmetic, calibrated metrics, adapted frames, and residual checks for
//! the structural identities they satisfy.

// Tensor arithmetic makes indexed loops over several arrays at once the
// clearer form; iterator rewrites would bury the index symmetry.
#![allow(clippy::needless_range_loop)]

pub mod checks;
pub mod cli;
pub mod error;
pub mod frames;
pub mod geometry;
pub mod jet_linalg;
pub mod jets;
pub mod manifolds;
pub mod poly;
pub mod sampling;
pub mod tensors;

pub use error::{Error, Result};
pub use jets::{C64, Jet1, Jet2};
