//! Multiple-scattering coefficients for an infinite grating of insulating
//! dielectric circular cylinders illuminated by an obliquely incident,
//! vertically polarized plane wave.
//!
//! The crate is `no_std` (it needs `alloc`). Pipeline:
//!
//! 1. [`grating`]: configuration, derived wavenumbers and the per-order
//!    scalar coefficients.
//! 2. [`lattice`]: accelerated Schlömilch lattice sums and Rayleigh-anomaly
//!    detection.
//! 3. [`system`]: assembly of the block system for orders `n != 0`, its
//!    solution (dense LU, Schur substitution, or the pre-elimination system
//!    that includes `n = 0`), and recovery of the zeroth order.
//! 4. [`fields`]: incident and exterior axial fields from a solution.
//!
//! Cylinder functions of real argument live in [`special`]; the dense complex
//! LU used by every solver route lives in [`linalg`].
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod fields;
pub mod grating;
pub mod lattice;
pub mod linalg;
pub mod special;
pub mod system;

pub use error::{Error, ErrorKind, Result};
pub use num_complex::Complex64;

/// Crate version, embedded in output headers by front-ends.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
