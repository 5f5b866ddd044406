//! Spectral toolkit for the degenerate stability of Sobolev inequalities on
//! the circle, on spheres and on S¹(1/√(d−2)) × S^{d−1}.
//!
//! The crate evaluates deficits and stability quotients of trial functions
//! given by finitely many spectral coefficients, exposes the spectrum of the
//! linearized operator at the constant optimizer, reproduces the quartic
//! stability exponent and the sharp asymptotic constants along near-optimal
//! families, and searches the truncated coefficient space for small
//! quotients.

pub mod error;
pub mod functionals;
pub mod geometry;
pub mod hessian;
pub mod optimizer;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
pub use functionals::{DeficitReport, SpectralFunction};
pub use geometry::{Geometry, GeometryKind};

/// Library version reported in every serialized run.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
