//! Vector-bundle-valued distributions and smoothing operators on discretized
//! manifolds.
//!
//! Distributional sections of a bundle `E → M` are represented three ways
//! (smooth sections with distributional coefficients, module maps
//! `Γ(M, E*) → D′(M)`, and coordinates on a generating set) with exact
//! conversions between them. Operators `D′(M, E) → Γ(N, F)` are split into a
//! smooth kernel section of `E* ⊠ F` and a scalar smoothing kernel, and
//! checked against direct kernel application.

pub mod bundles;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod geometry;
pub mod random;
pub mod scene;
pub mod sections;
pub mod smoothing;
pub mod suite;
pub mod vdist;

pub use error::{Error, Result};

/// CSV float format: 17 significant digits in scientific notation.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}
