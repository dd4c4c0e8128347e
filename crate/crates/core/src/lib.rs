//! Numerical laboratory for the deformed Wigner model H = lambda V + W:
//! the limiting spectral theory (deformed semicircle law, edge constants,
//! Weibull/Gaussian edge statistics), Green-function diagnostics, and a
//! deterministic Monte Carlo harness that checks the theory at desk scale.

pub mod error;
pub mod experiments;
pub mod cli;
pub mod diagnostics;
pub mod ensemble;
pub mod freeconv;
pub mod jsonio;
pub mod measure;
mod linalg;
mod tridiag;

pub use error::{Error, Result};
