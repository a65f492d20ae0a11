//! Numerical laboratory for strict deformation quantization on Lie groupoid
//! models: Lie algebroid structure functions and dual Poisson brackets,
//! fiberwise Fourier transforms on vector bundles, groupoid convolution
//! algebras with reduced norms, Weyl quantization, and an hbar-sweep harness
//! measuring Dirac's condition, asymptotic multiplicativity, and continuity
//! of the norm field.

pub mod banded;
pub mod error;
pub mod algebroid;
pub mod fourier;
pub mod grids;
pub mod phase;
pub mod models;
pub mod poisson;
pub mod powerit;
pub mod symbol;

pub use error::{Result, SdqError};
pub use num_complex::Complex64;
