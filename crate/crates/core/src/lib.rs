//! Harmonic analysis of the SU(2)-averaging operator `T` and the
//! ultrahyperbolic operator `□ = Δ_x - Δ_y` on `S3 × S3`.
//!
//! Every identity is checked twice where possible: once in exact rational
//! arithmetic on truncated spectral data, and once in floating point through
//! quadrature that does not share code with the exact path.

pub mod error;
pub mod harmonics;
pub mod matrix;
pub mod operators;
pub mod poly;
pub mod product;
pub mod quadrature;
pub mod quaternion;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
