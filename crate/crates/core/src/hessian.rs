//! The second variation of each inequality at the constant optimizer.
//!
//! On mean-zero perturbations r the deficit expands as
//! ‖r‖² − (q−1)·mass·‖r‖₂², which is diagonal in the spectral basis. Mode
//! eigenvalues are
//!
//! * circle: (2πk)² − S(q−2) = (2π)²(k² − 1)
//! * sphere: ℓ(ℓ+d−1) − d
//! * product: (d−2)(k² − 1) + ℓ(ℓ+d−2)
//!
//! The fourth-order budget records the loss carried by the zero mode, the
//! gain recovered by the optimal degree-two corrector and their difference.

use serde::Serialize;
use std::f64::consts::PI;

use crate::geometry::{Geometry, GeometryKind};
use crate::spectral::{harmonic_multiplicity, sphere_area};

/// |raw eigenvalue| below this counts as zero.
pub const ZERO_TOL: f64 = 1e-10;
/// Cutoff bound for spectra.
pub const MAX_CUTOFF: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Constant in the circle variable (k = 0), or no circle factor.
    Even,
    Cos,
    Sin,
}

/// A mode of the linearized operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ModeLabel {
    /// Circle frequency (0 on the sphere).
    pub k: usize,
    /// Zonal degree (0 on the circle).
    pub l: usize,
    pub branch: Branch,
}

impl ModeLabel {
    pub fn circle(k: usize) -> Self {
        Self {
            k,
            l: 0,
            branch: if k == 0 { Branch::Even } else { Branch::Cos },
        }
    }

    pub fn sphere(l: usize) -> Self {
        Self {
            k: 0,
            l,
            branch: Branch::Even,
        }
    }

    pub fn product(k: usize, l: usize) -> Self {
        Self {
            k,
            l,
            branch: if k == 0 { Branch::Even } else { Branch::Cos },
        }
    }

    fn with_branch(self, branch: Branch) -> Self {
        Self { branch, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub mode: ModeLabel,
    pub raw_eigenvalue: f64,
    /// raw / (frequency² + mass), in [2 − q, 1).
    pub normalized_eigenvalue: f64,
    /// Number of independent harmonics the entry stands for (zonal
    /// representatives carry the full degree-ℓ dimension).
    pub multiplicity: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpectrumCounts {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HessianSpectrum {
    /// Sorted ascending by raw eigenvalue.
    pub entries: Vec<SpectrumEntry>,
    /// Counts of entries (not multiplicities).
    pub counts: SpectrumCounts,
    pub kernel_modes: Vec<ModeLabel>,
}

impl HessianSpectrum {
    fn from_entries(mut entries: Vec<SpectrumEntry>) -> Self {
        entries.sort_by(|a, b| {
            a.raw_eigenvalue
                .total_cmp(&b.raw_eigenvalue)
                .then(a.mode.cmp(&b.mode))
        });
        let mut counts = SpectrumCounts {
            negative: 0,
            zero: 0,
            positive: 0,
        };
        let mut kernel_modes = Vec::new();
        for e in &entries {
            if e.raw_eigenvalue.abs() < ZERO_TOL {
                counts.zero += 1;
                kernel_modes.push(e.mode);
            } else if e.raw_eigenvalue < 0.0 {
                counts.negative += 1;
            } else {
                counts.positive += 1;
            }
        }
        Self {
            entries,
            counts,
            kernel_modes,
        }
    }

    /// Kernel dimension counting multiplicities.
    pub fn kernel_dimension(&self) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.raw_eigenvalue.abs() < ZERO_TOL)
            .map(|e| e.multiplicity)
            .sum()
    }

    /// Smallest strictly positive entry.
    pub fn first_positive(&self) -> Option<&SpectrumEntry> {
        self.entries.iter().find(|e| e.raw_eigenvalue >= ZERO_TOL)
    }
}

/// Eigenvalue of the linearized operator on the given mode. The branch is
/// irrelevant; the label's (k, ℓ) is read according to the geometry.
pub fn linearized_eigenvalue(g: &Geometry, mode: ModeLabel) -> f64 {
    let d = g.dim() as f64;
    match g.kind {
        GeometryKind::Circle => {
            let k = mode.k as f64;
            (2.0 * PI * k).powi(2) - g.sobolev_constant * (g.q - 2.0)
        }
        GeometryKind::Sphere => {
            let l = mode.l as f64;
            l * (l + d - 1.0) - d
        }
        GeometryKind::Product => {
            let (k, l) = (mode.k as f64, mode.l as f64);
            (d - 2.0) * (k * k - 1.0) + l * (l + d - 2.0)
        }
    }
}

fn frequency_sq(g: &Geometry, mode: ModeLabel) -> f64 {
    match g.kind {
        GeometryKind::Circle => g.circle_frequency_sq(mode.k),
        GeometryKind::Sphere => g.zonal_frequency_sq(mode.l),
        GeometryKind::Product => g.circle_frequency_sq(mode.k) + g.zonal_frequency_sq(mode.l),
    }
}

/// All modes up to `cutoff` (clamped to 64).
///
/// Circle modes k ≥ 1 and product modes with k ≥ 1 appear as separate cos
/// and sin entries; sphere degrees appear once with their multiplicity.
pub fn spectrum(g: &Geometry, cutoff: usize) -> HessianSpectrum {
    let cutoff = cutoff.min(MAX_CUTOFF);
    let mut entries = Vec::new();
    let mut push = |mode: ModeLabel, multiplicity: u64| {
        let raw = linearized_eigenvalue(g, mode);
        entries.push(SpectrumEntry {
            mode,
            raw_eigenvalue: raw,
            normalized_eigenvalue: raw / (frequency_sq(g, mode) + g.mass),
            multiplicity,
        });
    };
    match g.kind {
        GeometryKind::Circle => {
            push(ModeLabel::circle(0), 1);
            for k in 1..=cutoff {
                push(ModeLabel::circle(k), 1);
                push(ModeLabel::circle(k).with_branch(Branch::Sin), 1);
            }
        }
        GeometryKind::Sphere => {
            for l in 0..=cutoff {
                push(ModeLabel::sphere(l), harmonic_multiplicity(g.dim(), l));
            }
        }
        GeometryKind::Product => {
            let ring = g.dim() - 1;
            for k in 0..=cutoff {
                for l in 0..=cutoff {
                    let m = harmonic_multiplicity(ring, l);
                    push(ModeLabel::product(k, l), m);
                    if k > 0 {
                        push(ModeLabel::product(k, l).with_branch(Branch::Sin), m);
                    }
                }
            }
        }
    }
    HessianSpectrum::from_entries(entries)
}

/// Spectrum of −Δ − (d−2) on S¹(r) × S^{d−1}: eigenvalues
/// k²/r² + ℓ(ℓ+d−2) − (d−2). A kernel appears at the standard radius
/// r = 1/√(d−2) (mode k = 1) and again at r = k/√(d−2) for larger k.
pub fn product_radius_spectrum(d: usize, radius: f64, cutoff: usize) -> HessianSpectrum {
    let cutoff = cutoff.min(MAX_CUTOFF);
    let df = d as f64;
    let mass = (df - 2.0).powi(2) / 4.0;
    let ring = d.saturating_sub(1);
    let mut entries = Vec::new();
    for k in 0..=cutoff {
        for l in 0..=cutoff {
            let (kf, lf) = (k as f64, l as f64);
            let freq = kf * kf / (radius * radius) + lf * (lf + df - 2.0);
            let raw = freq - (df - 2.0);
            let m = harmonic_multiplicity(ring, l);
            let mut push = |mode| {
                entries.push(SpectrumEntry {
                    mode,
                    raw_eigenvalue: raw,
                    normalized_eigenvalue: raw / (freq + mass),
                    multiplicity: m,
                })
            };
            push(ModeLabel::product(k, l));
            if k > 0 {
                push(ModeLabel::product(k, l).with_branch(Branch::Sin));
            }
        }
    }
    HessianSpectrum::from_entries(entries)
}

/// Fourth-order coefficients of the deficit along u = 1 + μ(g + R), in
/// units where the constant has coefficient one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuarticBudget {
    /// μ⁴ coefficient from the zero mode alone.
    pub loss: f64,
    /// μ⁴ coefficient recovered by the optimal corrector.
    pub gain: f64,
    /// loss − gain, evaluated from its own closed form.
    pub net: f64,
    /// μ⁴ = conversion · ‖u − ū‖⁴ to leading order (equals 1/‖g‖⁴).
    pub distance_conversion: f64,
    /// ‖1‖², the squared norm of the constant function.
    pub constant_norm_sq: f64,
    /// net · conversion · ‖1‖².
    pub implied_sharp_constant: f64,
}

/// The quadratic-plus-linear polynomial ρa² − βa in the corrector amplitude
/// a at μ = 1 whose minimum is −gain. `a` is measured in the orthonormal
/// degree-two mode on the sphere and in the cos 4πt coefficient otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectorPolynomial {
    pub quadratic: f64,
    pub linear: f64,
    /// Factor turning the minimizing `a` into the coefficient of the
    /// natural corrector shape (cos 4πt or ω_{d+1}² − 1/(d+1)).
    pub natural_scale: f64,
}

impl CorrectorPolynomial {
    pub fn eval(&self, a: f64) -> f64 {
        self.quadratic * a * a - self.linear * a
    }
}

/// Geometry parameters after the product-to-circle scaling reduction.
fn reduced(g: &Geometry) -> (f64, Option<f64>) {
    match g.kind {
        GeometryKind::Circle | GeometryKind::Product => (g.q, None),
        GeometryKind::Sphere => (g.q, Some(g.dim() as f64)),
    }
}

pub fn quartic_budget(g: &Geometry) -> QuarticBudget {
    match reduced(g) {
        (q, None) => {
            let s = (2.0 * PI).powi(2) / (q - 2.0);
            let loss = s * (q + 1.0) * (q - 1.0) * (q - 2.0) / 32.0;
            let gain = s * (q - 1.0).powi(2) * (q - 2.0) / 96.0;
            let net = s * (q + 2.0) * (q - 1.0) * (q - 2.0) / 48.0;
            let conversion = 4.0 / ((q - 1.0).powi(2) * s * s);
            QuarticBudget {
                loss,
                gain,
                net,
                distance_conversion: conversion,
                constant_norm_sq: s,
                implied_sharp_constant: net * conversion * s,
            }
        }
        (q, Some(d)) => {
            let area = sphere_area(g.dim());
            let loss = d * (q - 1.0) * (q + d) / (2.0 * (d + 1.0).powi(2) * (d + 3.0)) * area;
            let gain = d.powi(3) * (q - 1.0).powi(2)
                / (2.0 * (d + 1.0).powi(2) * (d + 2.0) * (d + 3.0))
                * area;
            let net = d * (q - 1.0) * (2.0 * d - (d - 2.0) * q)
                / (2.0 * (d + 1.0) * (d + 2.0) * (d + 3.0))
                * area;
            let g_norm_sq = d * (q - 1.0) / ((q - 2.0) * (d + 1.0)) * area;
            let conversion = 1.0 / (g_norm_sq * g_norm_sq);
            let constant_norm_sq = d / (q - 2.0) * area;
            QuarticBudget {
                loss,
                gain,
                net,
                distance_conversion: conversion,
                constant_norm_sq,
                implied_sharp_constant: net * conversion * constant_norm_sq,
            }
        }
    }
}

/// The polynomial whose completed square defines the gain.
pub fn corrector_polynomial(g: &Geometry) -> CorrectorPolynomial {
    match reduced(g) {
        (q, None) => {
            let s = (2.0 * PI).powi(2) / (q - 2.0);
            let pre = 0.5 * (q - 2.0) * s;
            CorrectorPolynomial {
                quadratic: pre * 3.0,
                linear: pre * (q - 1.0) / 2.0,
                natural_scale: 1.0,
            }
        }
        (q, Some(d)) => {
            let area = sphere_area(g.dim());
            let overlap = (2.0 * d * area / ((d + 1.0).powi(2) * (d + 3.0))).sqrt();
            CorrectorPolynomial {
                quadratic: d + 2.0,
                linear: d * (q - 1.0) * overlap,
                // Y_{2,0} = (ω² − 1/(d+1)) / overlap
                natural_scale: 1.0 / overlap,
            }
        }
    }
}

/// Coefficient of the degree-two mode in the optimal corrector:
/// (q−1)/12 on the circle and the product, d(q−1)/(2(d+2)) on the sphere.
pub fn corrector_coefficient(g: &Geometry) -> f64 {
    match reduced(g) {
        (q, None) => (q - 1.0) / 12.0,
        (q, Some(d)) => d * (q - 1.0) / (2.0 * (d + 2.0)),
    }
}
