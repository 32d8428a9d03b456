//! Recovery of cusp and corner locations of a penetrable 2D scatterer from
//! multi-static far-field data.
//!
//! The pipeline: synthesize far-field matrices with a Lippmann–Schwinger
//! volume solver (`forward`), sweep a frequency window and locate the dips of
//! a truncated far-field-operator indicator (`spectral`), then evaluate the
//! recovered Herglotz wave function and cluster its vanishing/localizing
//! points (`reconstruct`). The `oracle` module provides disk ground truth
//! (Mie series, per-mode transmission eigenvalues, search-window bounds)
//! against which everything else is validated.

pub mod error;
pub mod forward;
pub mod geometry;
pub mod linalg;
pub mod oracle;
pub mod reconstruct;
pub mod spectral;
pub mod specfun;

pub use error::{Error, Result};
