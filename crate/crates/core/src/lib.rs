//! Local sonic-supersonic solutions of steady, irrotational, isentropic relativistic
//! magnetohydrodynamics with a convex pressure law.
//!
//! Pipeline: [`thermo`] (state algebra in the hodograph variable) → [`boundary`]
//! (sonic-curve and characteristic data) → [`hodograph_solver`] (Picard iteration on
//! the homogenized Goursat problem) → [`physical_recovery`] (inverse mapping to the
//! physical plane) → [`verify`] (residual and audit suite). [`cli`] drives it from a
//! TOML configuration.

// `!(x > 0.0)` is the idiom for rejecting NaN along with the failed comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops that walk several parallel arrays at once read better than zips.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod hodograph_solver;
pub mod numerics;
pub mod physical_recovery;
pub mod boundary;
pub mod cli;
pub mod thermo;
pub mod verify;

pub use error::{Error, Result};
