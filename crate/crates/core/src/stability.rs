//! Near-optimal families, ε-scans of the stability quotient, log-log
//! exponent fits and extrapolation of the sharp asymptotic constant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{
    stability_report_with, QuadratureSettings, SpectralFunction, TensorCoeffs,
};
use crate::geometry::{Geometry, GeometryKind};
use crate::hessian::corrector_coefficient;
use crate::spectral::{zonal_eval, FourierCoeffs};

/// Largest admissible amplitude of a family.
pub const MAX_EPSILON: f64 = 0.3;
/// Smallest ε a scan may reach.
pub const MIN_EPSILON: f64 = 1e-4;
/// Deficits at or below this multiple of ‖u‖² are treated as rounding noise.
pub const NOISE_FLOOR_REL: f64 = 1e-13;
/// Required max/min distance ratio for an exponent fit.
pub const MIN_FIT_SPREAD: f64 = 1.5;

/// The sharp liminf constant C* of the quotient near the constants.
pub fn sharp_constant(g: &Geometry) -> f64 {
    let q = g.q;
    match g.kind {
        GeometryKind::Circle | GeometryKind::Product => {
            (q + 2.0) * (q - 2.0) / (12.0 * (q - 1.0))
        }
        GeometryKind::Sphere => sphere_sharp_constant(g.dim() as f64, q),
    }
}

/// The sphere expression, valid for real d (d = 1 reproduces the circle).
pub fn sphere_sharp_constant(d: f64, q: f64) -> f64 {
    (d + 1.0) * (q - 2.0) * (2.0 * d - q * (d - 2.0))
        / (2.0 * (d + 2.0) * (d + 3.0) * (q - 1.0))
}

/// Which one-parameter family a scan follows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Family {
    /// 1 + ε·(zero mode) + ε²·(optimal corrector).
    Extremal,
    /// The same with the corrector scaled by `scale` (0 removes it).
    Corrector { scale: f64 },
    /// 1 + ε·(single mode) without corrector. `k` is the circle frequency,
    /// `l` the zonal degree; the sphere ignores `k`, the circle ignores `l`.
    Mode { k: usize, l: usize },
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(0.0..=MAX_EPSILON).contains(&eps) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    Ok(())
}

/// 1 + ε·g + ε²·h with the optimal corrector h.
pub fn extremal_family(g: &Geometry, eps: f64) -> Result<SpectralFunction> {
    corrected_family(g, eps, 1.0)
}

/// The extremal family with its corrector multiplied by `scale`.
pub fn corrected_family(g: &Geometry, eps: f64, scale: f64) -> Result<SpectralFunction> {
    check_epsilon(eps)?;
    let h = scale * corrector_coefficient(g) * eps * eps;
    match g.kind {
        GeometryKind::Circle | GeometryKind::Product => {
            let mut c = FourierCoeffs::constant(1.0);
            c.set_cos(1, eps);
            c.set_cos(2, h);
            if g.kind == GeometryKind::Circle {
                SpectralFunction::circle(*g, c)
            } else {
                SpectralFunction::product_from_profile(*g, &c)
            }
        }
        GeometryKind::Sphere => {
            let d = g.dim();
            let df = d as f64;
            // 1 = Y0/Y0(1), x = Y1/Y1(1), x² − 1/(d+1) = (d/(d+1))·Y2/Y2(1)
            let zonal = vec![
                1.0 / zonal_eval(d, 0, 1.0)?,
                eps / zonal_eval(d, 1, 1.0)?,
                h * (df / (df + 1.0)) / zonal_eval(d, 2, 1.0)?,
            ];
            SpectralFunction::sphere(*g, zonal)
        }
    }
}

/// 1 + ε·φ for a single mode φ normalized to sup-norm one.
pub fn mode_family(g: &Geometry, k: usize, l: usize, eps: f64) -> Result<SpectralFunction> {
    check_epsilon(eps)?;
    match g.kind {
        GeometryKind::Circle => {
            let mut c = FourierCoeffs::constant(1.0);
            c.set_cos(k, eps);
            SpectralFunction::circle(*g, c)
        }
        GeometryKind::Sphere => {
            let d = g.dim();
            let mut zonal = vec![0.0; l + 1];
            zonal[0] = 1.0 / zonal_eval(d, 0, 1.0)?;
            zonal[l] += eps / zonal_eval(d, l, 1.0)?;
            SpectralFunction::sphere(*g, zonal)
        }
        GeometryKind::Product => {
            let ring = g.dim() - 1;
            let mut t = TensorCoeffs::default();
            t.set_cos(0, 0, 1.0 / zonal_eval(ring, 0, 1.0)?);
            let v = t.cos_at(k, l) + eps / zonal_eval(ring, l, 1.0)?;
            t.set_cos(k, l, v);
            SpectralFunction::product(*g, t)
        }
    }
}

/// Member of `family` at amplitude ε.
pub fn family_member(g: &Geometry, family: Family, eps: f64) -> Result<SpectralFunction> {
    match family {
        Family::Extremal => extremal_family(g, eps),
        Family::Corrector { scale } => corrected_family(g, eps, scale),
        Family::Mode { k, l } => mode_family(g, k, l, eps),
    }
}

/// The first strictly positive mode of the linearized operator:
/// k = 2 (circle), ℓ = 2 (sphere), (k, ℓ) = (0, 1) (product).
pub fn first_positive_mode(g: &Geometry) -> Family {
    match g.kind {
        GeometryKind::Circle => Family::Mode { k: 2, l: 0 },
        GeometryKind::Sphere => Family::Mode { k: 0, l: 2 },
        GeometryKind::Product => Family::Mode { k: 0, l: 1 },
    }
}

/// Geometric ε grid ε₀·factorⁱ, i = 0..count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonGrid {
    pub start: f64,
    pub factor: f64,
    pub count: usize,
}

impl EpsilonGrid {
    pub fn new(start: f64, factor: f64, count: usize) -> Result<Self> {
        let grid = Self {
            start,
            factor,
            count,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start > 0.0 && self.start <= MAX_EPSILON) {
            return Err(Error::EpsilonOutOfRange(self.start));
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(Error::InvalidScan(format!(
                "factor {} must lie in (0, 1)",
                self.factor
            )));
        }
        if self.count < 3 {
            return Err(Error::InvalidScan(format!(
                "count {} must be at least 3",
                self.count
            )));
        }
        let smallest = self.start * self.factor.powi(self.count as i32 - 1);
        if smallest < MIN_EPSILON {
            return Err(Error::InvalidScan(format!(
                "smallest epsilon {smallest:e} is below {MIN_EPSILON:e}"
            )));
        }
        Ok(())
    }

    pub fn epsilons(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| self.start * self.factor.powi(i as i32))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub family: Family,
    pub epsilons: Vec<f64>,
    pub norm_sqs: Vec<f64>,
    pub lq_norms: Vec<f64>,
    pub deficits: Vec<f64>,
    pub dist_sqs: Vec<f64>,
    pub quotients: Vec<f64>,
    pub fitted_exponent: f64,
    pub extrapolated_constant: f64,
    /// |Q(ε_min) − extrapolated|.
    pub error_estimate: f64,
}

/// Scans the extremal family.
pub fn epsilon_scan(g: &Geometry, start: f64, factor: f64, count: usize) -> Result<ScanResult> {
    scan_family(
        g,
        Family::Extremal,
        &EpsilonGrid::new(start, factor, count)?,
        &QuadratureSettings::default(),
    )
}

/// Scans any family. Points are evaluated in parallel; the result does not
/// depend on the schedule.
pub fn scan_family(
    g: &Geometry,
    family: Family,
    grid: &EpsilonGrid,
    settings: &QuadratureSettings,
) -> Result<ScanResult> {
    grid.validate()?;
    let epsilons = grid.epsilons();
    let reports = epsilons
        .par_iter()
        .map(|&eps| {
            let u = family_member(g, family, eps)?;
            let r = stability_report_with(&u, settings)?;
            if r.deficit <= NOISE_FLOOR_REL * r.norm_sq {
                return Err(Error::NoisyScan {
                    epsilon: eps,
                    deficit: r.deficit,
                    floor: NOISE_FLOOR_REL * r.norm_sq,
                });
            }
            let quotient = r.quotient.ok_or(Error::DegenerateDistance)?;
            Ok((r, quotient))
        })
        .collect::<Result<Vec<_>>>()?;

    let quotients: Vec<f64> = reports.iter().map(|(_, q)| *q).collect();
    let pairs: Vec<(f64, f64)> = reports.iter().map(|(r, _)| (r.dist_sq, r.deficit)).collect();
    let fitted_exponent = fit_exponent(&pairs)?;
    let n = quotients.len();
    let extrapolated_constant =
        richardson(quotients[n - 2], quotients[n - 1], grid.factor);
    Ok(ScanResult {
        family,
        epsilons,
        norm_sqs: reports.iter().map(|(r, _)| r.norm_sq).collect(),
        lq_norms: reports.iter().map(|(r, _)| r.lq_norm).collect(),
        deficits: reports.iter().map(|(r, _)| r.deficit).collect(),
        dist_sqs: reports.iter().map(|(r, _)| r.dist_sq).collect(),
        error_estimate: (quotients[n - 1] - extrapolated_constant).abs(),
        quotients,
        fitted_exponent,
        extrapolated_constant,
    })
}

/// Least-squares slope α of log(deficit) against log(√distSq).
pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 3 {
        return Err(Error::InvalidScan(format!(
            "{} pairs; at least 3 are needed",
            pairs.len()
        )));
    }
    if pairs
        .iter()
        .any(|&(s, d)| !(s > 0.0 && d > 0.0 && s.is_finite() && d.is_finite()))
    {
        return Err(Error::InvalidScan("pairs must be positive and finite".into()));
    }
    let dists: Vec<f64> = pairs.iter().map(|p| p.0.sqrt()).collect();
    let lo = dists.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = dists.iter().cloned().fold(0.0, f64::max);
    if hi / lo < MIN_FIT_SPREAD {
        return Err(Error::InsufficientRange { ratio: hi / lo });
    }
    let xs: Vec<f64> = dists.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

fn richardson(q_prev: f64, q_last: f64, factor: f64) -> f64 {
    (q_last - factor * q_prev) / (1.0 - factor)
}

/// Two-point Richardson extrapolation on the two smallest ε of a scan,
/// under a linear model Q(ε) = C + c₁ε.
pub fn extrapolate_constant(scan: &ScanResult) -> Result<f64> {
    let n = scan.epsilons.len();
    if n < 3 || scan.quotients.len() != n {
        return Err(Error::InvalidScan("scan needs at least 3 points".into()));
    }
    let factor = scan.epsilons[n - 1] / scan.epsilons[n - 2];
    Ok(richardson(scan.quotients[n - 2], scan.quotients[n - 1], factor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{deficit, h1_norm_sq, mean_project};

    #[test]
    fn sharp_constant_values() {
        let c = |q| sharp_constant(&Geometry::circle(q).unwrap());
        assert!((c(4.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((c(6.0) - 8.0 / 15.0).abs() < 1e-15);
        assert!((c(3.0) - 5.0 / 24.0).abs() < 1e-15);
        assert!((sharp_constant(&Geometry::product(3).unwrap()) - 8.0 / 15.0).abs() < 1e-15);
        assert!((sharp_constant(&Geometry::sphere(2, 3.0).unwrap()) - 0.15).abs() < 1e-15);
        assert!((sharp_constant(&Geometry::sphere(3, 4.0).unwrap()) - 4.0 / 45.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_formula_at_d1_is_the_circle() {
        for q in [2.1, 3.0, 4.0, 7.5, 12.0] {
            let c = sharp_constant(&Geometry::circle(q).unwrap());
            assert!((sphere_sharp_constant(1.0, q) - c).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_epsilon_is_constant() {
        for g in [
            Geometry::circle(4.0).unwrap(),
            Geometry::sphere(3, 3.0).unwrap(),
            Geometry::product(4).unwrap(),
        ] {
            let u = extremal_family(&g, 0.0).unwrap();
            assert!(deficit(&u).unwrap().abs() < 1e-12 * h1_norm_sq(&u));
            let (mean, _) = mean_project(&u);
            assert!((mean - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn epsilon_range() {
        let g = Geometry::circle(4.0).unwrap();
        assert_eq!(extremal_family(&g, 0.31), Err(Error::EpsilonOutOfRange(0.31)));
        assert!(extremal_family(&g, -0.1).is_err());
    }

    #[test]
    fn circle_family_coefficient() {
        let u = extremal_family(&Geometry::circle(4.0).unwrap(), 0.1).unwrap();
        match u.coefficients() {
            crate::functionals::Coefficients::Circle(c) => {
                assert!((c.cos_coeff(2) - 0.0025).abs() < 1e-17);
                assert_eq!(c.cos_coeff(1), 0.1);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn sphere_family_pointwise() {
        let g = Geometry::sphere(2, 3.0).unwrap();
        let u = extremal_family(&g, 0.1).unwrap();
        for &x in &[-1.0, -0.3, 0.0, 0.6, 1.0] {
            let expect = 1.0 + 0.1 * x + 0.01 * 0.5 * (x * x - 1.0 / 3.0);
            assert!((u.eval(0.0, x) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn product_family_pointwise() {
        let g = Geometry::product(3).unwrap();
        let u = extremal_family(&g, 0.2).unwrap();
        let h = 5.0 / 12.0 * 0.04;
        for &t in &[0.0, 0.1, 0.37] {
            let arg = 2.0 * std::f64::consts::PI * t;
            let expect = 1.0 + 0.2 * arg.cos() + h * (2.0 * arg).cos();
            assert!((u.eval(t, 0.4) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn mode_family_pointwise() {
        let g = Geometry::product(4).unwrap();
        let u = mode_family(&g, 1, 2, 0.1).unwrap();
        // zonal degree 2 on S³ normalized to 1 at the pole: (4x² − 1)/3
        let x = 0.3;
        let t = 0.2;
        let expect = 1.0 + 0.1 * (2.0 * std::f64::consts::PI * t).cos() * (4.0 * x * x - 1.0) / 3.0;
        assert!((u.eval(t, x) - expect).abs() < 1e-14);
    }

    #[test]
    fn exact_fourth_power() {
        let pairs: Vec<(f64, f64)> = [0.1f64, 0.05, 0.025, 0.0125]
            .iter()
            .map(|&d| (d * d, d.powi(4)))
            .collect();
        assert!((fit_exponent(&pairs).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn narrow_spread_rejected() {
        let pairs = vec![(1.0, 1.0), (1.1, 1.2), (1.2, 1.4)];
        assert!(matches!(fit_exponent(&pairs), Err(Error::InsufficientRange { .. })));
    }

    #[test]
    fn linear_model_is_exact() {
        let epsilons: Vec<f64> = (0..5).map(|i| 0.08 * 0.5f64.powi(i)).collect();
        let quotients: Vec<f64> = epsilons.iter().map(|e| 1.0 / 3.0 + 0.7 * e).collect();
        let scan = ScanResult {
            family: Family::Extremal,
            norm_sqs: vec![1.0; 5],
            lq_norms: vec![1.0; 5],
            deficits: vec![1.0; 5],
            dist_sqs: vec![1.0; 5],
            epsilons,
            quotients,
            fitted_exponent: 4.0,
            extrapolated_constant: 0.0,
            error_estimate: 0.0,
        };
        assert!((extrapolate_constant(&scan).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn grid_validation() {
        assert!(EpsilonGrid::new(0.08, 0.5, 2).is_err());
        assert!(EpsilonGrid::new(0.4, 0.5, 5).is_err());
        assert!(EpsilonGrid::new(0.08, 1.0, 5).is_err());
        assert!(EpsilonGrid::new(1e-3, 0.1, 3).is_err());
        assert!(EpsilonGrid::new(0.08, 0.5, 5).is_ok());
    }

    #[test]
    fn circle_scan_q4() {
        let g = Geometry::circle(4.0).unwrap();
        let s = epsilon_scan(&g, 0.08, 0.5, 5).unwrap();
        assert!((s.extrapolated_constant - 1.0 / 3.0).abs() < 1e-2 / 3.0);
        assert!((s.fitted_exponent - 4.0).abs() < 0.05);
        assert!(s.quotients.iter().all(|&q| q > 0.0 && q.is_finite()));
    }
}
