//! Norms, L^q norms, deficits, projections onto the constants and the
//! stability quotient Q[u] = ‖u‖²·deficit/‖u − ū‖⁴.

mod eval;
mod function;

pub use eval::{
    deficit, deficit_with, h1_norm_sq, lq_norm, lq_norm_with, mean_project, stability_quotient,
    stability_report, stability_report_with, DeficitReport, QuadratureSettings,
    DEFAULT_GRID_CAP, DEGENERATE_DIST_REL, LQ_REL_TOL,
};
pub use function::{Coefficients, SpectralFunction, TensorCoeffs, MAX_MODES};
