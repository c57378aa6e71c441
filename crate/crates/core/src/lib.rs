//! Numerical kernels for 2-microlocal Besov and Triebel-Lizorkin spaces with
//! variable integrability.
//!
//! Everything works on finite uniform grids: exponent fields and weights are
//! closed-form evaluators, functions are samples on a periodic box, and the
//! geometric objects (cube lattices, raster domains) are exact combinatorial
//! structures over dyadic coordinates.

pub mod analysis;
pub mod atoms;
pub mod error;
pub mod exponents;
pub mod geometry;
pub mod norms;
pub mod sampling;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Crate version, recorded in report provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
