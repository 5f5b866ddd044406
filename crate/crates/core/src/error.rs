use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Variants are grouped by the layer that raises them. [`Error::is_numerical`]
/// separates failures of the numerics (non-convergence, noise) from invalid
/// input, which is how the command line maps them onto exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature order {0} outside 1..=4096")]
    InvalidOrder(usize),
    #[error("zonal degree {degree} exceeds basis maximum {max}")]
    DegreeOutOfRange { degree: usize, max: usize },
    #[error("grid of {n} points cannot resolve the modes (need a power of two >= {required})")]
    AliasedGrid { n: usize, required: usize },
    #[error("dimension {0} outside the supported range")]
    InvalidDimension(usize),

    #[error("exponent q = {0} must exceed 2")]
    SubcriticalExponent(f64),
    #[error("exponent q = {q} must stay below the critical value {critical}")]
    SupercriticalExponent { q: f64, critical: f64 },
    #[error("exponent q = {q} exceeds the certified cap {cap}")]
    ExponentTooLarge { q: f64, cap: f64 },
    #[error("product geometry needs d >= 3, got {0}")]
    DimensionTooSmall(usize),

    #[error("mode count {count} exceeds the truncation limit {max}")]
    TooManyModes { count: usize, max: usize },
    #[error("coefficients do not match the geometry: {0}")]
    GeometryMismatch(String),
    #[error("L^q quadrature did not converge at the grid cap (last {last}, previous {previous})")]
    QuadratureNotConverged { last: f64, previous: f64 },
    #[error("distance to the constants vanishes; quotient undefined")]
    DegenerateDistance,

    #[error("epsilon {0} outside [0, 0.3]")]
    EpsilonOutOfRange(f64),
    #[error("invalid scan parameters: {0}")]
    InvalidScan(String),
    #[error("deficit {deficit:e} at epsilon {epsilon} is below the noise floor {floor:e}")]
    NoisyScan { epsilon: f64, deficit: f64, floor: f64 },
    #[error("distance spread {ratio} too small for an exponent fit")]
    InsufficientRange { ratio: f64 },
    #[error("invalid search direction: {0}")]
    InvalidDirection(String),

    #[error("every restart hit a degenerate distance")]
    SearchDegenerate,
    #[error("invalid optimizer settings: {0}")]
    InvalidSettings(String),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNotConverged { .. }
                | Error::NoisyScan { .. }
                | Error::SearchDegenerate
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
