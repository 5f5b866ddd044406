//! Gauss–Legendre rules and the polar-angle rule used on spheres.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use super::gamma::sphere_area;
use crate::error::{Error, Result};

/// Largest Gauss–Legendre order accepted by [`gauss_legendre`].
pub const MAX_ORDER: usize = 4096;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITERS: usize = 100;

/// An n-point rule on [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Applies the rule to `f` on [-1, 1].
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Applies the rule to `f` on [a, b].
    pub fn integrate_on<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        half * self.integrate(|x| f(mid + half * x))
    }
}

/// Legendre polynomial P_n(x) and its derivative, by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let nf = n as f64;
    let dp = nf * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// The n-point Gauss–Legendre rule on [-1, 1], nodes ascending.
///
/// Nodes come from Newton's method on P_n started at the Tricomi asymptotic
/// guesses; only the non-negative half is computed and the rest mirrored, so
/// the rule is exactly symmetric.
pub fn gauss_legendre(n: usize) -> Result<Quadrature> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::InvalidOrder(n));
    }
    let nf = n as f64;
    let half = n / 2;
    let mut upper: Vec<(f64, f64)> = Vec::with_capacity(half + 1);
    for i in 1..=half {
        let theta = PI * (i as f64 - 0.25) / (nf + 0.5);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        for _ in 0..NEWTON_MAX_ITERS {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= NEWTON_TOL * x.abs().max(1e-3) {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        upper.push((x, w));
    }

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &(x, w) in &upper {
        nodes.push(-x);
        weights.push(w);
    }
    if n % 2 == 1 {
        let (_, dp) = legendre_with_derivative(n, 0.0);
        nodes.push(0.0);
        weights.push(2.0 / (dp * dp));
    }
    for &(x, w) in upper.iter().rev() {
        nodes.push(x);
        weights.push(w);
    }
    Ok(Quadrature { nodes, weights })
}

static POW2_RULES: [OnceLock<Arc<Quadrature>>; 13] = [const { OnceLock::new() }; 13];

/// Same as [`gauss_legendre`] but shares the rule for power-of-two orders,
/// which are the only orders the adaptive integrators ask for.
pub fn gauss_legendre_shared(n: usize) -> Result<Arc<Quadrature>> {
    if n.is_power_of_two() && n <= MAX_ORDER {
        let slot = &POW2_RULES[n.trailing_zeros() as usize];
        if let Some(rule) = slot.get() {
            return Ok(rule.clone());
        }
        let rule = Arc::new(gauss_legendre(n)?);
        return Ok(slot.get_or_init(|| rule).clone());
    }
    gauss_legendre(n).map(Arc::new)
}

/// Quadrature for zonal integrands on S^d, in the latitude x = cos(theta).
///
/// The Gauss–Legendre rule is applied in the polar angle theta on [0, pi], so
/// `weights[i]` already contains |S^{d-1}| sin^{d-1}(theta_i). Integrals of
/// functions of x alone are `sum_i weights[i] * f(nodes[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    pub dimension: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(dimension: usize, n: usize) -> Result<Self> {
        Self::on_arc(dimension, n, 0.0, PI)
    }

    /// The n-point rule restricted to polar angles in [theta_a, theta_b].
    /// Integrands with kinks (|u|^q at sign changes) converge spectrally when
    /// the arc is split at the kinks.
    pub fn on_arc(dimension: usize, n: usize, theta_a: f64, theta_b: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidDimension(dimension));
        }
        let rule = gauss_legendre_shared(n)?;
        let ring = sphere_area(dimension - 1);
        let half = 0.5 * (theta_b - theta_a);
        let mid = 0.5 * (theta_b + theta_a);
        let (nodes, weights) = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&s, &w)| {
                let theta = mid + half * s;
                let sin = theta.sin();
                (theta.cos(), ring * sin.powi(dimension as i32 - 1) * w * half)
            })
            .unzip();
        Ok(Self {
            dimension,
            nodes,
            weights,
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}
