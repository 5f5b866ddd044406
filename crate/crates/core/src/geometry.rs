//! The three manifolds and their constants.
//!
//! * Circle: R/Z with S = (2π)²/(q−2).
//! * Sphere: S^d with Y = d/(q−2) · |S^d|^{1−2/q}, 2 < q < 2d/(d−2).
//! * Product: S¹(1/√(d−2)) × S^{d−1}(1) at the critical exponent
//!   q = 2d/(d−2), with Y = (d−2)²/4 · Vol^{2/d}.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::sphere_area;

/// Largest exponent accepted on S² where the critical exponent is infinite.
pub const SPHERE2_MAX_Q: f64 = 64.0;
/// Dimension bound for spheres and products.
pub const MAX_DIMENSION: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Circle,
    Sphere,
    Product,
}

impl fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GeometryKind::Circle => "circle",
            GeometryKind::Sphere => "sphere",
            GeometryKind::Product => "product",
        };
        f.write_str(s)
    }
}

/// A validated geometry with every derived constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Geometry {
    pub kind: GeometryKind,
    pub q: f64,
    /// Manifold dimension; `None` for the circle.
    pub d: Option<usize>,
    /// S on the circle, Y on the sphere and the product.
    pub sobolev_constant: f64,
    /// Zeroth-order coefficient of the quadratic form: S, d/(q−2) or (d−2)²/4.
    pub mass: f64,
    /// Total measure: 1, |S^d| or Vol(M).
    pub volume: f64,
}

/// Critical Sobolev exponent 2d/(d−2) (infinite for d ≤ 2).
pub fn critical_exponent(d: usize) -> f64 {
    if d <= 2 {
        f64::INFINITY
    } else {
        2.0 * d as f64 / (d as f64 - 2.0)
    }
}

/// Radius 1/√(d−2) of the circle factor of the product manifold.
pub fn product_radius(d: usize) -> Result<f64> {
    if d < 3 {
        return Err(Error::DimensionTooSmall(d));
    }
    Ok(1.0 / (d as f64 - 2.0).sqrt())
}

fn check_q(q: f64) -> Result<()> {
    if !q.is_finite() || q <= 2.0 {
        return Err(Error::SubcriticalExponent(q));
    }
    Ok(())
}

impl Geometry {
    /// Builds a geometry; `q` is ignored for the product and `d` for the circle.
    pub fn new(kind: GeometryKind, q: f64, d: usize) -> Result<Self> {
        match kind {
            GeometryKind::Circle => Self::circle(q),
            GeometryKind::Sphere => Self::sphere(d, q),
            GeometryKind::Product => Self::product(d),
        }
    }

    pub fn circle(q: f64) -> Result<Self> {
        check_q(q)?;
        let s = (2.0 * PI).powi(2) / (q - 2.0);
        Ok(Self {
            kind: GeometryKind::Circle,
            q,
            d: None,
            sobolev_constant: s,
            mass: s,
            volume: 1.0,
        })
    }

    pub fn sphere(d: usize, q: f64) -> Result<Self> {
        if !(2..=MAX_DIMENSION).contains(&d) {
            return Err(Error::InvalidDimension(d));
        }
        check_q(q)?;
        let critical = critical_exponent(d);
        if q >= critical {
            return Err(Error::SupercriticalExponent { q, critical });
        }
        if d == 2 && q > SPHERE2_MAX_Q {
            return Err(Error::ExponentTooLarge {
                q,
                cap: SPHERE2_MAX_Q,
            });
        }
        let area = sphere_area(d);
        let mass = d as f64 / (q - 2.0);
        Ok(Self {
            kind: GeometryKind::Sphere,
            q,
            d: Some(d),
            sobolev_constant: mass * area.powf(1.0 - 2.0 / q),
            mass,
            volume: area,
        })
    }

    pub fn product(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::DimensionTooSmall(d));
        }
        if d > MAX_DIMENSION {
            return Err(Error::InvalidDimension(d));
        }
        let df = d as f64;
        let q = critical_exponent(d);
        let volume = 2.0 * PI / (df - 2.0).sqrt() * sphere_area(d - 1);
        let mass = (df - 2.0).powi(2) / 4.0;
        Ok(Self {
            kind: GeometryKind::Product,
            q,
            d: Some(d),
            sobolev_constant: mass * volume.powf(2.0 / df),
            mass,
            volume,
        })
    }

    /// Dimension as a plain integer (1 for the circle).
    pub fn dim(&self) -> usize {
        self.d.unwrap_or(1)
    }

    /// Length of the circle factor: 1 on the circle, 2π/√(d−2) on the product.
    pub fn circle_length(&self) -> f64 {
        match self.kind {
            GeometryKind::Circle => 1.0,
            GeometryKind::Sphere => f64::NAN,
            GeometryKind::Product => 2.0 * PI / (self.dim() as f64 - 2.0).sqrt(),
        }
    }

    /// Squared frequency of the circle mode k: (2πk)² or (d−2)k².
    pub(crate) fn circle_frequency_sq(&self, k: usize) -> f64 {
        let kf = k as f64;
        match self.kind {
            GeometryKind::Circle => (2.0 * PI * kf).powi(2),
            _ => (self.dim() as f64 - 2.0) * kf * kf,
        }
    }

    /// Squared frequency of zonal degree ℓ on the spherical factor.
    pub(crate) fn zonal_frequency_sq(&self, l: usize) -> f64 {
        let lf = l as f64;
        match self.kind {
            GeometryKind::Circle => f64::NAN,
            GeometryKind::Sphere => lf * (lf + self.dim() as f64 - 1.0),
            GeometryKind::Product => lf * (lf + self.dim() as f64 - 2.0),
        }
    }

}
