//! L²-orthonormal zonal harmonics on S^d.
//!
//! A zonal harmonic of degree ℓ is the Gegenbauer polynomial C_ℓ^λ with
//! λ = (d-1)/2, viewed as a function of the latitude x = ω_{d+1}. The basis
//! stores the weighted norms h_ℓ = ∫_{S^d} (C_ℓ^λ)² dω and evaluates the
//! normalized family through the orthonormal form of the Gegenbauer
//! recurrence, x Y_{ℓ-1} = a_ℓ Y_ℓ + a_{ℓ-1} Y_{ℓ-2}.

use super::gamma::sphere_area;
use crate::error::{Error, Result};

/// Largest supported zonal degree.
pub const MAX_DEGREE: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ZonalBasis {
    dimension: usize,
    max_degree: usize,
    /// ∫_{S^d} (C_ℓ^λ)² dω for ℓ = 0..=L.
    norms: Vec<f64>,
    /// a_ℓ of the orthonormal recurrence, index 0 unused.
    recurrence: Vec<f64>,
    y0: f64,
}

impl ZonalBasis {
    pub fn new(dimension: usize, max_degree: usize) -> Result<Self> {
        if !(2..=16).contains(&dimension) {
            return Err(Error::InvalidDimension(dimension));
        }
        if max_degree > MAX_DEGREE {
            return Err(Error::DegreeOutOfRange {
                degree: max_degree,
                max: MAX_DEGREE,
            });
        }
        let lambda = (dimension as f64 - 1.0) / 2.0;
        let area = sphere_area(dimension);
        let mut norms = Vec::with_capacity(max_degree + 1);
        let mut recurrence = vec![0.0; max_degree + 1];
        norms.push(area);
        for l in 1..=max_degree {
            let lf = l as f64;
            let ratio = (lf + 2.0 * lambda - 1.0) * (lf + lambda - 1.0) / (lf * (lf + lambda));
            norms.push(norms[l - 1] * ratio);
            recurrence[l] = 0.5
                * (lf * (lf + 2.0 * lambda - 1.0) / ((lf + lambda - 1.0) * (lf + lambda))).sqrt();
        }
        Ok(Self {
            dimension,
            max_degree,
            norms,
            recurrence,
            y0: 1.0 / area.sqrt(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Weighted norm ∫_{S^d} (C_ℓ^λ)² dω of the unnormalized Gegenbauer polynomial.
    pub fn gegenbauer_norm_sq(&self, degree: usize) -> Result<f64> {
        self.check(degree)?;
        Ok(self.norms[degree])
    }

    /// Laplace–Beltrami eigenvalue ℓ(ℓ + d − 1) of degree-ℓ harmonics.
    pub fn eigenvalue(&self, degree: usize) -> f64 {
        let l = degree as f64;
        l * (l + self.dimension as f64 - 1.0)
    }

    /// Value of the orthonormal zonal harmonic Y_ℓ at latitude x.
    pub fn eval(&self, degree: usize, x: f64) -> Result<f64> {
        self.check(degree)?;
        let mut prev = 0.0;
        let mut cur = self.y0;
        for l in 1..=degree {
            let next = (x * cur - self.recurrence[l - 1] * prev) / self.recurrence[l];
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    /// Values of Y_0..=Y_L at x, written into `out` (resized to L + 1).
    pub fn eval_all(&self, x: f64, out: &mut Vec<f64>) {
        out.clear();
        out.push(self.y0);
        if self.max_degree == 0 {
            return;
        }
        out.push(x * self.y0 / self.recurrence[1]);
        for l in 2..=self.max_degree {
            let v = (x * out[l - 1] - self.recurrence[l - 1] * out[l - 2]) / self.recurrence[l];
            out.push(v);
        }
    }

    fn check(&self, degree: usize) -> Result<()> {
        if degree > self.max_degree {
            Err(Error::DegreeOutOfRange {
                degree,
                max: self.max_degree,
            })
        } else {
            Ok(())
        }
    }
}

/// Convenience wrapper: orthonormal zonal harmonic of degree ℓ on S^d at x.
pub fn zonal_eval(dimension: usize, degree: usize, x: f64) -> Result<f64> {
    ZonalBasis::new(dimension, degree)?.eval(degree, x)
}

/// Unnormalized Gegenbauer polynomial C_n^λ(x) by the classical recurrence.
pub fn gegenbauer(lambda: f64, n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * lambda * x;
    for k in 2..=n {
        let kf = k as f64;
        let next = (2.0 * (kf + lambda - 1.0) * x * cur - (kf + 2.0 * lambda - 2.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    cur
}

/// Dimension of the space of degree-ℓ spherical harmonics on S^d.
pub fn harmonic_multiplicity(dimension: usize, degree: usize) -> u64 {
    let binom = |n: usize, k: usize| -> u128 {
        if k > n {
            return 0;
        }
        let k = k.min(n - k);
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc
    };
    let d = dimension;
    let l = degree;
    let total = binom(l + d, d);
    let lower = if l >= 2 { binom(l + d - 2, d) } else { 0 };
    (total - lower) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_and_linear_harmonics() {
        for d in 2..=6 {
            let area = sphere_area(d);
            for &x in &[-1.0, -0.3, 0.0, 0.7, 1.0] {
                let y0 = zonal_eval(d, 0, x).unwrap();
                assert!((y0 - 1.0 / area.sqrt()).abs() < 1e-15);
                let y1 = zonal_eval(d, 1, x).unwrap();
                let expect = x * ((d as f64 + 1.0) / area).sqrt();
                assert!((y1 - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn degree_two_on_s2_at_pole() {
        let got = zonal_eval(2, 2, 1.0).unwrap();
        let expect = (45.0 / (16.0 * PI)).sqrt() * (2.0 / 3.0);
        assert!((got - expect).abs() < 1e-14);
    }

    #[test]
    fn degree_two_matches_closed_form() {
        for d in 2..=8 {
            let df = d as f64;
            let area = sphere_area(d);
            let scale = ((df + 1.0).powi(2) * (df + 3.0) / (2.0 * df * area)).sqrt();
            for &x in &[-0.9, -0.2, 0.4, 0.95] {
                let expect = scale * (x * x - 1.0 / (df + 1.0));
                assert!((zonal_eval(d, 2, x).unwrap() - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn normalized_values_agree_with_raw_gegenbauer() {
        let basis = ZonalBasis::new(3, 20).unwrap();
        let lambda = 1.0;
        for l in 0..=20 {
            let norm = basis.gegenbauer_norm_sq(l).unwrap().sqrt();
            for &x in &[-0.8, 0.1, 0.6] {
                let raw = gegenbauer(lambda, l, x) / norm;
                let y = basis.eval(l, x).unwrap();
                assert!((raw - y).abs() < 1e-12 * (1.0 + y.abs()), "l = {l}, x = {x}");
            }
        }
    }

    #[test]
    fn eval_all_matches_eval() {
        let basis = ZonalBasis::new(4, 12).unwrap();
        let mut out = Vec::new();
        basis.eval_all(0.37, &mut out);
        assert_eq!(out.len(), 13);
        for (l, v) in out.iter().enumerate() {
            assert!((v - basis.eval(l, 0.37).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn degree_out_of_range() {
        let basis = ZonalBasis::new(2, 4).unwrap();
        assert_eq!(
            basis.eval(5, 0.0),
            Err(Error::DegreeOutOfRange { degree: 5, max: 4 })
        );
        assert!(ZonalBasis::new(2, 65).is_err());
        assert_eq!(ZonalBasis::new(1, 4), Err(Error::InvalidDimension(1)));
    }

    #[test]
    fn multiplicities() {
        // S^2: 2ℓ + 1
        for l in 0..10 {
            assert_eq!(harmonic_multiplicity(2, l), 2 * l as u64 + 1);
        }
        // degree one on S^d is d + 1 dimensional
        for d in 2..10 {
            assert_eq!(harmonic_multiplicity(d, 1), d as u64 + 1);
        }
        assert_eq!(harmonic_multiplicity(3, 2), 9);
        assert_eq!(harmonic_multiplicity(1, 3), 2);
    }
}
