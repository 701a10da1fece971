//! Numerical kernels shared by the solver stages.

pub mod cheb;
pub mod interp;
pub mod quad;
pub mod roots;

pub use cheb::Chebyshev;
pub use quad::{integrate, integrate_tol, ABS_TOL, REL_TOL};
pub use roots::{brent, expand_bracket, ROOT_TOL};
