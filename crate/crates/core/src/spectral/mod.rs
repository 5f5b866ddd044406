//! Quadrature rules, zonal harmonics, trigonometric synthesis and the
//! special-function values shared by every geometry.

mod fourier;
mod gamma;
mod quadrature;
mod zonal;

pub use fourier::{circle_analysis, circle_synthesis, min_grid, FourierCoeffs};
pub(crate) use fourier::{sample_at, twiddles};
pub use gamma::{gamma, ln_gamma, sphere_area};
pub use quadrature::{gauss_legendre, gauss_legendre_shared, Quadrature, SphereRule, MAX_ORDER};
pub use zonal::{gegenbauer, harmonic_multiplicity, zonal_eval, ZonalBasis, MAX_DEGREE};
