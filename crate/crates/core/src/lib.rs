//! Numerical laboratory for dispersive decay estimates obtained from commuting
//! vector fields.
//!
//! The crate provides exact solvers for phase-space transport (by
//! characteristics) and for constant-coefficient dispersive equations (by
//! Fourier multipliers), the commuting operators of those equations, the
//! norms appearing in the decay estimates, and a harness that samples each
//! estimate in time and fits decay exponents.

pub mod error;
pub mod fields;
pub mod harness;
pub mod norms;
pub mod spectral;
pub mod symmetry;
pub mod transport;

pub use error::{Error, Result};
