use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, GeometryKind};
use crate::spectral::{sphere_area, FourierCoeffs, ZonalBasis};

/// Truncation limit on Fourier modes and zonal degrees.
pub const MAX_MODES: usize = 64;

/// Coefficients of a product-manifold function, zonal on the S^{d−1} factor.
///
/// `cos[k][ℓ]` multiplies cos(k√(d−2)s)·Y_ℓ(ω) for k = 0..=K and
/// `sin[k-1][ℓ]` multiplies sin(k√(d−2)s)·Y_ℓ(ω) for k = 1..=K, where Y_ℓ is
/// the orthonormal zonal harmonic on S^{d−1}. Ragged rows are zero-padded.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TensorCoeffs {
    #[serde(rename = "tensor")]
    pub cos: Vec<Vec<f64>>,
    #[serde(rename = "tensor_sin", default)]
    pub sin: Vec<Vec<f64>>,
}

impl TensorCoeffs {
    pub fn cos_at(&self, k: usize, l: usize) -> f64 {
        self.cos.get(k).and_then(|r| r.get(l)).copied().unwrap_or(0.0)
    }

    pub fn sin_at(&self, k: usize, l: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.sin.get(k - 1).and_then(|r| r.get(l)).copied().unwrap_or(0.0)
    }

    pub fn set_cos(&mut self, k: usize, l: usize, value: f64) {
        if self.cos.len() <= k {
            self.cos.resize(k + 1, Vec::new());
        }
        let row = &mut self.cos[k];
        if row.len() <= l {
            row.resize(l + 1, 0.0);
        }
        row[l] = value;
    }

    pub fn set_sin(&mut self, k: usize, l: usize, value: f64) {
        assert!(k > 0, "mode 0 has no sine part");
        if self.sin.len() < k {
            self.sin.resize(k, Vec::new());
        }
        let row = &mut self.sin[k - 1];
        if row.len() <= l {
            row.resize(l + 1, 0.0);
        }
        row[l] = value;
    }

    /// Highest Fourier mode K.
    pub fn max_k(&self) -> usize {
        self.cos.len().saturating_sub(1).max(self.sin.len())
    }

    /// Highest zonal degree L.
    pub fn max_l(&self) -> usize {
        self.cos
            .iter()
            .chain(&self.sin)
            .map(|r| r.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    /// Fourier series in the normalized circle variable for zonal degree ℓ.
    pub(crate) fn column(&self, l: usize) -> FourierCoeffs {
        let k_max = self.max_k();
        let mut f = FourierCoeffs::constant(self.cos_at(0, l));
        for k in 1..=k_max {
            f.set_cos(k, self.cos_at(k, l));
            f.set_sin(k, self.sin_at(k, l));
        }
        f
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.cos.iter().chain(&self.sin).flatten()
    }
}

/// Coefficients in the geometry's orthogonal basis.
///
/// Serialized untagged as `{"a0", "cos", "sin"}`, `{"zonal"}` or
/// `{"tensor", "tensor_sin"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficients {
    Circle(FourierCoeffs),
    /// Orthonormal zonal coefficients c_ℓ, ℓ = 0..=L.
    Sphere { zonal: Vec<f64> },
    Product(TensorCoeffs),
}

impl Coefficients {
    fn kind(&self) -> GeometryKind {
        match self {
            Coefficients::Circle(_) => GeometryKind::Circle,
            Coefficients::Sphere { .. } => GeometryKind::Sphere,
            Coefficients::Product(_) => GeometryKind::Product,
        }
    }
}

/// A trial function: a geometry plus finitely many real coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralFunction {
    geometry: Geometry,
    coefficients: Coefficients,
}

impl SpectralFunction {
    pub fn new(geometry: Geometry, coefficients: Coefficients) -> Result<Self> {
        if coefficients.kind() != geometry.kind {
            return Err(Error::GeometryMismatch(format!(
                "{} coefficients for a {} geometry",
                coefficients.kind(),
                geometry.kind
            )));
        }
        let (count, finite) = match &coefficients {
            Coefficients::Circle(c) => (
                c.max_mode(),
                c.a0.is_finite() && c.cos.iter().chain(&c.sin).all(|v| v.is_finite()),
            ),
            Coefficients::Sphere { zonal } => (
                zonal.len().saturating_sub(1),
                zonal.iter().all(|v| v.is_finite()),
            ),
            Coefficients::Product(t) => {
                (t.max_k().max(t.max_l()), t.values().all(|v| v.is_finite()))
            }
        };
        if count > MAX_MODES {
            return Err(Error::TooManyModes {
                count,
                max: MAX_MODES,
            });
        }
        if !finite {
            return Err(Error::GeometryMismatch("non-finite coefficient".into()));
        }
        Ok(Self {
            geometry,
            coefficients,
        })
    }

    pub fn circle(geometry: Geometry, coeffs: FourierCoeffs) -> Result<Self> {
        Self::new(geometry, Coefficients::Circle(coeffs))
    }

    pub fn sphere(geometry: Geometry, zonal: Vec<f64>) -> Result<Self> {
        Self::new(geometry, Coefficients::Sphere { zonal })
    }

    pub fn product(geometry: Geometry, tensor: TensorCoeffs) -> Result<Self> {
        Self::new(geometry, Coefficients::Product(tensor))
    }

    /// The constant function u ≡ value.
    pub fn constant(geometry: Geometry, value: f64) -> Self {
        let coefficients = match geometry.kind {
            GeometryKind::Circle => Coefficients::Circle(FourierCoeffs::constant(value)),
            GeometryKind::Sphere => Coefficients::Sphere {
                zonal: vec![value * geometry.volume.sqrt()],
            },
            GeometryKind::Product => {
                let mut t = TensorCoeffs::default();
                t.set_cos(0, 0, value * Self::ring_area(&geometry).sqrt());
                Coefficients::Product(t)
            }
        };
        Self {
            geometry,
            coefficients,
        }
    }

    /// A product-manifold function of the circle variable alone.
    ///
    /// `profile` is a Fourier series in t = s√(d−2)/(2π) ∈ [0, 1), so its
    /// mode k is cos(k√(d−2)s).
    pub fn product_from_profile(geometry: Geometry, profile: &FourierCoeffs) -> Result<Self> {
        if geometry.kind != GeometryKind::Product {
            return Err(Error::GeometryMismatch("profile needs a product geometry".into()));
        }
        let scale = Self::ring_area(&geometry).sqrt();
        let mut t = TensorCoeffs::default();
        t.set_cos(0, 0, profile.a0 * scale);
        for k in 1..=profile.max_mode() {
            t.set_cos(k, 0, profile.cos_coeff(k) * scale);
            t.set_sin(k, 0, profile.sin_coeff(k) * scale);
        }
        Self::product(geometry, t)
    }

    fn ring_area(geometry: &Geometry) -> f64 {
        sphere_area(geometry.dim() - 1)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    /// (highest Fourier mode, highest zonal degree); unused slots are 0.
    pub fn truncation(&self) -> (usize, usize) {
        match &self.coefficients {
            Coefficients::Circle(c) => (c.max_mode(), 0),
            Coefficients::Sphere { zonal } => (0, zonal.len().saturating_sub(1)),
            Coefficients::Product(t) => (t.max_k(), t.max_l()),
        }
    }

    /// λu.
    pub fn scaled(&self, factor: f64) -> Self {
        let coefficients = match &self.coefficients {
            Coefficients::Circle(c) => Coefficients::Circle(c.scaled(factor)),
            Coefficients::Sphere { zonal } => Coefficients::Sphere {
                zonal: zonal.iter().map(|v| v * factor).collect(),
            },
            Coefficients::Product(t) => Coefficients::Product(TensorCoeffs {
                cos: t.cos.iter().map(|r| r.iter().map(|v| v * factor).collect()).collect(),
                sin: t.sin.iter().map(|r| r.iter().map(|v| v * factor).collect()).collect(),
            }),
        };
        Self {
            geometry: self.geometry,
            coefficients,
        }
    }

    /// Translate along the circle factor by a fraction `shift` of its length.
    /// Spheres have no such symmetry in the zonal class; they are returned
    /// unchanged.
    pub fn shifted(&self, shift: f64) -> Self {
        let coefficients = match &self.coefficients {
            Coefficients::Circle(c) => Coefficients::Circle(c.shifted(shift)),
            Coefficients::Sphere { .. } => self.coefficients.clone(),
            Coefficients::Product(t) => {
                let mut out = TensorCoeffs::default();
                for l in 0..=t.max_l() {
                    let col = t.column(l).shifted(shift);
                    out.set_cos(0, l, col.a0);
                    for k in 1..=col.max_mode() {
                        out.set_cos(k, l, col.cos_coeff(k));
                        out.set_sin(k, l, col.sin_coeff(k));
                    }
                }
                Coefficients::Product(out)
            }
        };
        Self {
            geometry: self.geometry,
            coefficients,
        }
    }

    /// Pointwise value. `t` is the normalized circle variable (unused on the
    /// sphere), `x` the latitude (unused on the circle).
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        match &self.coefficients {
            Coefficients::Circle(c) => c.eval(t),
            Coefficients::Sphere { zonal } => {
                let basis = ZonalBasis::new(self.geometry.dim(), zonal.len().saturating_sub(1))
                    .expect("validated truncation");
                let mut ys = Vec::new();
                basis.eval_all(x, &mut ys);
                zonal.iter().zip(&ys).map(|(c, y)| c * y).sum()
            }
            Coefficients::Product(tc) => {
                let basis = ZonalBasis::new(self.geometry.dim() - 1, tc.max_l())
                    .expect("validated truncation");
                let mut ys = Vec::new();
                basis.eval_all(x, &mut ys);
                (0..=tc.max_l()).map(|l| tc.column(l).eval(t) * ys[l]).sum()
            }
        }
    }

    /// Per-mode contributions to the squared norm, keyed by (k, ℓ).
    ///
    /// Circle entries use ℓ = 0, sphere entries k = 0. Cosine and sine parts
    /// of one frequency are summed.
    pub fn mode_energies(&self) -> Vec<((usize, usize), f64)> {
        let g = &self.geometry;
        match &self.coefficients {
            Coefficients::Circle(c) => (0..=c.max_mode())
                .map(|k| {
                    let amp = c.cos_coeff(k).powi(2) + c.sin_coeff(k).powi(2);
                    let basis = if k == 0 { 1.0 } else { 0.5 };
                    ((k, 0), (g.circle_frequency_sq(k) + g.mass) * amp * basis)
                })
                .collect(),
            Coefficients::Sphere { zonal } => zonal
                .iter()
                .enumerate()
                .map(|(l, c)| ((0, l), (g.zonal_frequency_sq(l) + g.mass) * c * c))
                .collect(),
            Coefficients::Product(t) => {
                let length = 2.0 * PI / (g.dim() as f64 - 2.0).sqrt();
                let mut out = Vec::new();
                for k in 0..=t.max_k() {
                    for l in 0..=t.max_l() {
                        let amp = t.cos_at(k, l).powi(2) + t.sin_at(k, l).powi(2);
                        let basis = if k == 0 { length } else { 0.5 * length };
                        let freq = g.circle_frequency_sq(k) + g.zonal_frequency_sq(l);
                        out.push(((k, l), (freq + g.mass) * amp * basis));
                    }
                }
                out
            }
        }
    }

    /// Share of the fluctuation energy carried by the zero modes of the
    /// linearized operator: k = 1 (circle), ℓ = 1 (sphere), (k, ℓ) = (1, 0)
    /// (product). Phase-independent because cosine and sine parts are pooled.
    pub fn kernel_fraction(&self) -> f64 {
        let kernel = match self.geometry.kind {
            GeometryKind::Circle => (1, 0),
            GeometryKind::Sphere => (0, 1),
            GeometryKind::Product => (1, 0),
        };
        let mut total = 0.0;
        let mut on_kernel = 0.0;
        for (mode, e) in self.mode_energies() {
            if mode == (0, 0) {
                continue;
            }
            total += e;
            if mode == kernel {
                on_kernel += e;
            }
        }
        if total > 0.0 {
            on_kernel / total
        } else {
            0.0
        }
    }

    pub(crate) fn without_constant_mode(&self) -> Self {
        let coefficients = match &self.coefficients {
            Coefficients::Circle(c) => {
                let mut c = c.clone();
                c.a0 = 0.0;
                Coefficients::Circle(c)
            }
            Coefficients::Sphere { zonal } => {
                let mut z = zonal.clone();
                if let Some(first) = z.first_mut() {
                    *first = 0.0;
                }
                Coefficients::Sphere { zonal: z }
            }
            Coefficients::Product(t) => {
                let mut t = t.clone();
                if t.cos.first().is_some_and(|r| !r.is_empty()) {
                    t.cos[0][0] = 0.0;
                }
                Coefficients::Product(t)
            }
        };
        Self {
            geometry: self.geometry,
            coefficients,
        }
    }

    /// The same fluctuation around a new mean value.
    pub(crate) fn with_mean(&self, mean: f64) -> Self {
        let mut out = self.without_constant_mode();
        match &mut out.coefficients {
            Coefficients::Circle(c) => c.a0 = mean,
            Coefficients::Sphere { zonal } => {
                if zonal.is_empty() {
                    zonal.push(0.0);
                }
                zonal[0] = mean * self.geometry.volume.sqrt();
            }
            Coefficients::Product(t) => {
                t.set_cos(0, 0, mean * Self::ring_area(&self.geometry).sqrt())
            }
        }
        out
    }

    /// Average value of u over the manifold.
    pub(crate) fn mean_value(&self) -> f64 {
        match &self.coefficients {
            Coefficients::Circle(c) => c.a0,
            Coefficients::Sphere { zonal } => {
                zonal.first().copied().unwrap_or(0.0) / self.geometry.volume.sqrt()
            }
            Coefficients::Product(t) => t.cos_at(0, 0) / Self::ring_area(&self.geometry).sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_evaluate_to_their_value() {
        let geos = [
            Geometry::circle(4.0).unwrap(),
            Geometry::sphere(3, 3.0).unwrap(),
            Geometry::product(4).unwrap(),
        ];
        for g in geos {
            let u = SpectralFunction::constant(g, 2.5);
            for &(t, x) in &[(0.0, 0.3), (0.4, -0.9)] {
                assert!((u.eval(t, x) - 2.5).abs() < 1e-14);
            }
            assert!((u.mean_value() - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn mismatched_coefficients_rejected() {
        let g = Geometry::circle(4.0).unwrap();
        let err = SpectralFunction::sphere(g, vec![1.0]).unwrap_err();
        assert!(matches!(err, Error::GeometryMismatch(_)));
    }

    #[test]
    fn too_many_modes() {
        let g = Geometry::circle(4.0).unwrap();
        let mut c = FourierCoeffs::constant(1.0);
        c.set_cos(65, 1.0);
        assert_eq!(
            SpectralFunction::circle(g, c).unwrap_err(),
            Error::TooManyModes { count: 65, max: 64 }
        );
    }

    #[test]
    fn profile_matches_circle_variable() {
        let g = Geometry::product(3).unwrap();
        let mut p = FourierCoeffs::constant(1.0);
        p.set_cos(1, 0.2);
        p.set_sin(2, -0.1);
        let u = SpectralFunction::product_from_profile(g, &p).unwrap();
        for &t in &[0.0, 0.13, 0.5] {
            assert!((u.eval(t, 0.4) - p.eval(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn tensor_shift_matches_evaluation() {
        let g = Geometry::product(4).unwrap();
        let mut t = TensorCoeffs::default();
        t.set_cos(0, 0, 1.0);
        t.set_cos(1, 1, 0.3);
        t.set_sin(2, 0, 0.2);
        let u = SpectralFunction::product(g, t).unwrap();
        let v = u.shifted(0.21);
        assert!((v.eval(0.5, 0.3) - u.eval(0.29, 0.3)).abs() < 1e-14);
    }
}
