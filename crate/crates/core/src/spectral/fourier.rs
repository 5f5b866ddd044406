//! Real trigonometric polynomials on the unit-period circle.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// u(t) = a0 + Σ_k (cos[k-1] cos 2πkt + sin[k-1] sin 2πkt), k = 1..=K.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FourierCoeffs {
    pub a0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl FourierCoeffs {
    pub fn constant(a0: f64) -> Self {
        Self {
            a0,
            ..Self::default()
        }
    }

    /// Highest mode K (the longer of the two sequences).
    pub fn max_mode(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    pub fn cos_coeff(&self, k: usize) -> f64 {
        if k == 0 {
            self.a0
        } else {
            self.cos.get(k - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn sin_coeff(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.sin.get(k - 1).copied().unwrap_or(0.0)
        }
    }

    /// Sets the cosine coefficient of mode k, growing storage as needed.
    pub fn set_cos(&mut self, k: usize, value: f64) {
        if k == 0 {
            self.a0 = value;
            return;
        }
        if self.cos.len() < k {
            self.cos.resize(k, 0.0);
        }
        self.cos[k - 1] = value;
    }

    pub fn set_sin(&mut self, k: usize, value: f64) {
        assert!(k > 0, "mode 0 has no sine part");
        if self.sin.len() < k {
            self.sin.resize(k, 0.0);
        }
        self.sin[k - 1] = value;
    }

    /// Coefficients of u(t - shift).
    pub fn shifted(&self, shift: f64) -> Self {
        let k_max = self.max_mode();
        let mut out = Self::constant(self.a0);
        for k in 1..=k_max {
            let (s, c) = (2.0 * PI * k as f64 * shift).sin_cos();
            let a = self.cos_coeff(k);
            let b = self.sin_coeff(k);
            // cos(2πk(t - τ)) = cos 2πkt cos 2πkτ + sin 2πkt sin 2πkτ
            out.set_cos(k, a * c - b * s);
            out.set_sin(k, a * s + b * c);
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            a0: self.a0 * factor,
            cos: self.cos.iter().map(|v| v * factor).collect(),
            sin: self.sin.iter().map(|v| v * factor).collect(),
        }
    }

    /// Point evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        let mut v = self.a0;
        for k in 1..=self.max_mode() {
            let (s, c) = (2.0 * PI * k as f64 * t).sin_cos();
            v += self.cos_coeff(k) * c + self.sin_coeff(k) * s;
        }
        v
    }
}

/// Table of (cos, sin)(2π m / n) for m = 0..n.
pub(crate) fn twiddles(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|m| {
            let (s, c) = (2.0 * PI * m as f64 / n as f64).sin_cos();
            (c, s)
        })
        .collect()
}

/// Values of `coeffs` at t_j = j / n for each j produced by `indices`.
pub(crate) fn sample_at<I>(coeffs: &FourierCoeffs, n: usize, table: &[(f64, f64)], indices: I) -> Vec<f64>
where
    I: Iterator<Item = usize>,
{
    let k_max = coeffs.max_mode();
    indices
        .map(|j| {
            let mut v = coeffs.a0;
            for k in 1..=k_max {
                let (c, s) = table[(k * j) % n];
                v += coeffs.cos_coeff(k) * c + coeffs.sin_coeff(k) * s;
            }
            v
        })
        .collect()
}

/// Smallest admissible uniform grid for modes up to `k_max`.
pub fn min_grid(k_max: usize) -> usize {
    (4 * k_max + 4).next_power_of_two()
}

/// Values at t_j = j / n, j = 0..n. `n` must be a power of two with
/// n >= 4K + 4.
pub fn circle_synthesis(coeffs: &FourierCoeffs, n: usize) -> Result<Vec<f64>> {
    let required = 4 * coeffs.max_mode() + 4;
    if n < required || !n.is_power_of_two() {
        return Err(Error::AliasedGrid {
            n,
            required: required.next_power_of_two(),
        });
    }
    let table = twiddles(n);
    Ok(sample_at(coeffs, n, &table, 0..n))
}

/// Discrete inverse of [`circle_synthesis`] for modes up to `k_max`.
pub fn circle_analysis(values: &[f64], k_max: usize) -> Result<FourierCoeffs> {
    let n = values.len();
    let required = 4 * k_max + 4;
    if n < required || !n.is_power_of_two() {
        return Err(Error::AliasedGrid {
            n,
            required: required.next_power_of_two(),
        });
    }
    let table = twiddles(n);
    let nf = n as f64;
    let mut out = FourierCoeffs::constant(values.iter().sum::<f64>() / nf);
    out.cos = vec![0.0; k_max];
    out.sin = vec![0.0; k_max];
    for k in 1..=k_max {
        let (mut a, mut b) = (0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            let (c, s) = table[(k * j) % n];
            a += v * c;
            b += v * s;
        }
        out.cos[k - 1] = 2.0 * a / nf;
        out.sin[k - 1] = 2.0 * b / nf;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_synthesis() {
        let v = circle_synthesis(&FourierCoeffs::constant(1.0), 8).unwrap();
        assert_eq!(v, vec![1.0; 8]);
    }

    #[test]
    fn first_cosine_at_origin() {
        let mut c = FourierCoeffs::default();
        c.set_cos(1, 1.0);
        let v = circle_synthesis(&c, 8).unwrap();
        assert_eq!(v[0], 1.0);
        assert!(v[2].abs() < 1e-15);
    }

    #[test]
    fn rejects_aliased_grids() {
        let mut c = FourierCoeffs::default();
        c.set_cos(3, 1.0);
        assert_eq!(
            circle_synthesis(&c, 8),
            Err(Error::AliasedGrid { n: 8, required: 16 })
        );
        assert!(circle_synthesis(&c, 24).is_err());
        assert!(circle_synthesis(&c, 16).is_ok());
    }

    #[test]
    fn round_trip_k8_n64() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut c = FourierCoeffs::constant(rng.gen_range(-1.0..1.0));
        for k in 1..=8 {
            c.set_cos(k, rng.gen_range(-1.0..1.0));
            c.set_sin(k, rng.gen_range(-1.0..1.0));
        }
        let back = circle_analysis(&circle_synthesis(&c, 64).unwrap(), 8).unwrap();
        assert!((back.a0 - c.a0).abs() < 1e-13);
        for k in 1..=8 {
            assert!((back.cos_coeff(k) - c.cos_coeff(k)).abs() < 1e-13);
            assert!((back.sin_coeff(k) - c.sin_coeff(k)).abs() < 1e-13);
        }
    }

    #[test]
    fn shift_matches_point_evaluation() {
        let mut c = FourierCoeffs::constant(0.5);
        c.set_cos(1, 0.3);
        c.set_sin(2, -0.7);
        c.set_cos(3, 0.1);
        let tau = 0.137;
        let shifted = c.shifted(tau);
        for &t in &[0.0, 0.2, 0.61] {
            assert!((shifted.eval(t) - c.eval(t - tau)).abs() < 1e-14);
        }
    }
}
