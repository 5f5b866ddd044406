use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::function::{Coefficients, SpectralFunction};
use crate::error::{Error, Result};
use crate::spectral::{sample_at, twiddles, SphereRule, ZonalBasis, MAX_ORDER};

/// Relative change of the L^q value below which grid doubling stops.
pub const LQ_REL_TOL: f64 = 1e-11;
/// Default cap on uniform grid sizes.
pub const DEFAULT_GRID_CAP: usize = 1 << 16;
/// distSq at or below this multiple of normSq counts as "constant".
pub const DEGENERATE_DIST_REL: f64 = 1e-14;

const CIRCLE_MIN_GRID: usize = 256;
const POLAR_MIN_GRID: usize = 64;

/// Grid limits for the adaptive L^q quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    /// Largest uniform grid on the circle (factor). Polar rules are further
    /// capped at the largest Gauss–Legendre order.
    pub grid_cap: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            grid_cap: DEFAULT_GRID_CAP,
        }
    }
}

impl QuadratureSettings {
    fn polar_cap(&self) -> usize {
        self.grid_cap.min(MAX_ORDER)
    }
}

/// Every scalar of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeficitReport {
    pub norm_sq: f64,
    pub lq_norm: f64,
    pub deficit: f64,
    pub mean: f64,
    pub dist_sq: f64,
    /// ‖u‖²·deficit/distSq²; absent when distSq ≤ 1e−14·normSq.
    pub quotient: Option<f64>,
    /// Points of the grid the L^q value was accepted on.
    pub quadrature_points: usize,
}

/// Squared norm from the coefficients (Parseval; no quadrature).
pub fn h1_norm_sq(u: &SpectralFunction) -> f64 {
    u.mode_energies().iter().map(|(_, e)| e).sum()
}

/// Mean value and the fluctuation u − ū.
pub fn mean_project(u: &SpectralFunction) -> (f64, SpectralFunction) {
    (u.mean_value(), u.without_constant_mode())
}

#[inline]
fn abs_pow(v: f64, q: f64, integer_q: Option<i32>) -> f64 {
    match integer_q {
        Some(n) => v.abs().powi(n),
        None => v.abs().powf(q),
    }
}

fn integer_exponent(q: f64) -> Option<i32> {
    (q.fract() == 0.0 && q <= 64.0).then_some(q as i32)
}

/// Neumaier-compensated sum.
fn compensated_sum<I: Iterator<Item = f64>>(iter: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in iter {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

fn converged(prev: f64, next: f64) -> bool {
    (next - prev).abs() <= LQ_REL_TOL * next.abs()
}

/// ∫|u|^q split as |ū|^q·Vol + ∫(|u|^q − |ū|^q).
///
/// Near the constants the second part is O(ε²) while the deficit is O(ε⁴);
/// computing it pointwise from the fluctuation keeps the deficit free of
/// the cancellation a direct ∫|u|^q would suffer.
#[derive(Debug, Clone, Copy)]
struct LqParts {
    base: f64,
    excess: f64,
    points: usize,
}

impl LqParts {
    fn norm(&self, q: f64) -> f64 {
        if self.base > 0.0 {
            self.base.powf(1.0 / q) * ((self.excess / self.base).ln_1p() / q).exp()
        } else {
            self.excess.powf(1.0 / q)
        }
    }
}

/// Pointwise |m + f|^q − |m|^q.
#[derive(Debug, Clone, Copy)]
struct Excess {
    q: f64,
    iq: Option<i32>,
    m: f64,
    mq: f64,
}

impl Excess {
    fn new(q: f64, m: f64) -> Self {
        let iq = integer_exponent(q);
        let mq = abs_pow(m, q, iq);
        // a subnormal or zero mean gains nothing from the split
        let (m, mq) = if mq.is_normal() { (m, mq) } else { (0.0, 0.0) };
        Self { q, iq, m, mq }
    }

    #[inline]
    fn at(&self, f: f64) -> f64 {
        if self.m == 0.0 {
            return abs_pow(f, self.q, self.iq);
        }
        let psi = f / self.m;
        if psi > -1.0 {
            self.mq * (self.q * psi.ln_1p()).exp_m1()
        } else {
            abs_pow(self.m + f, self.q, self.iq) - self.mq
        }
    }
}

fn lq_parts(u: &SpectralFunction, settings: &QuadratureSettings) -> Result<LqParts> {
    let g = u.geometry();
    let q = g.q;
    let ex = Excess::new(q, u.mean_value());
    let base = ex.mq * g.volume;
    let fl = u.without_constant_mode();
    let norm = |excess: f64| {
        LqParts {
            base,
            excess,
            points: 0,
        }
        .norm(q)
    };
    let (excess, points) = match fl.coefficients() {
        Coefficients::Circle(c) => {
            let mut n = CIRCLE_MIN_GRID.max(16 * c.max_mode()).next_power_of_two();
            let table = twiddles(n);
            let vals = sample_at(c, n, &table, 0..n);
            let mut sum = compensated_sum(vals.iter().map(|&v| ex.at(v)));
            let mut integral = sum / n as f64;
            loop {
                let n2 = 2 * n;
                if n2 > settings.grid_cap {
                    let last = norm(integral);
                    return Err(Error::QuadratureNotConverged {
                        last,
                        previous: last,
                    });
                }
                // the doubled grid reuses the current nodes; only midpoints are new
                let table = twiddles(n2);
                let mids = sample_at(c, n2, &table, (1..n2).step_by(2));
                sum += compensated_sum(mids.iter().map(|&v| ex.at(v)));
                let next = sum / n2 as f64;
                if converged(integral, next) {
                    break (next, n2);
                }
                if 2 * n2 > settings.grid_cap {
                    return Err(Error::QuadratureNotConverged {
                        last: norm(next),
                        previous: norm(integral),
                    });
                }
                integral = next;
                n = n2;
            }
        }
        Coefficients::Sphere { zonal } => {
            let l_max = zonal.len().saturating_sub(1);
            let basis = ZonalBasis::new(g.dim(), l_max)?;
            let value = |x: f64, ys: &mut Vec<f64>| -> f64 {
                basis.eval_all(x, ys);
                zonal.iter().zip(ys.iter()).skip(1).map(|(c, y)| c * y).sum()
            };
            // |u|^q is smooth where u is, except at sign changes when q is not
            // an even integer; integrate piecewise between them
            let arcs = if ex.iq.is_some_and(|n| n % 2 == 0) {
                vec![(0.0, PI)]
            } else {
                let mut ys = Vec::with_capacity(l_max + 1);
                split_at_sign_changes(
                    |theta| ex.m + value(theta.cos(), &mut ys),
                    32 * (l_max + 1),
                )
            };
            let eval = |n: usize| -> Result<f64> {
                let mut ys = Vec::with_capacity(l_max + 1);
                let mut terms = Vec::with_capacity(n * arcs.len());
                for &(a, b) in &arcs {
                    let rule = SphereRule::on_arc(g.dim(), n, a, b)?;
                    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                        terms.push(w * ex.at(value(x, &mut ys)));
                    }
                }
                Ok(compensated_sum(terms.into_iter()))
            };
            let start = if arcs.len() > 1 {
                POLAR_MIN_GRID / 2
            } else {
                POLAR_MIN_GRID.max(8 * l_max).next_power_of_two()
            };
            adaptive_doubling(start, settings.polar_cap(), eval, norm)?
        }
        Coefficients::Product(t) => {
            let k_max = t.max_k();
            let l_max = t.max_l();
            let basis = ZonalBasis::new(g.dim() - 1, l_max)?;
            let columns: Vec<_> = (0..=l_max).map(|l| t.column(l)).collect();
            let length = g.circle_length();
            let n_t0 = CIRCLE_MIN_GRID.max(16 * k_max).next_power_of_two();
            let n_p0 = POLAR_MIN_GRID.max(8 * l_max).next_power_of_two();
            let polar_cap = settings.polar_cap();
            let eval = |step: usize| -> Result<f64> {
                let n_t = n_t0 * step;
                let n_p = n_p0 * step;
                let rule = SphereRule::new(g.dim() - 1, n_p)?;
                let table = twiddles(n_t);
                // profiles[l][j] = column l at t_j
                let profiles: Vec<Vec<f64>> =
                    columns.iter().map(|c| sample_at(c, n_t, &table, 0..n_t)).collect();
                let mut ys = Vec::with_capacity(l_max + 1);
                let mut ring = Vec::with_capacity(rule.order());
                for &x in &rule.nodes {
                    basis.eval_all(x, &mut ys);
                    ring.push(ys.clone());
                }
                let terms = (0..n_t).flat_map(|j| {
                    let profiles = &profiles;
                    ring.iter().zip(&rule.weights).map(move |(ys, &w)| {
                        let v: f64 = ys.iter().enumerate().map(|(l, y)| profiles[l][j] * y).sum();
                        w * ex.at(v)
                    })
                });
                Ok(length * compensated_sum(terms) / n_t as f64)
            };
            // step multiplies both grids; stop when either would exceed its cap
            let max_step = (settings.grid_cap / n_t0).min(polar_cap / n_p0).max(1);
            let (excess, step) = adaptive_doubling(1, max_step, eval, norm)?;
            (excess, n_t0 * n_p0 * step * step)
        }
    };
    Ok(LqParts {
        base,
        excess,
        points,
    })
}

/// Sub-arcs of [0, π] separated by the sign changes of `f`, located on a
/// uniform scan of `samples` cells and refined by bisection.
fn split_at_sign_changes<F: FnMut(f64) -> f64>(mut f: F, samples: usize) -> Vec<(f64, f64)> {
    let h = PI / samples as f64;
    let mut cuts = vec![0.0];
    let mut prev = f(0.0);
    for i in 1..=samples {
        let theta = i as f64 * h;
        let cur = f(theta);
        if prev != 0.0 && cur != 0.0 && (prev < 0.0) != (cur < 0.0) {
            let (mut lo, mut hi, mut f_lo) = (theta - h, theta, prev);
            while hi - lo > 4.0 * f64::EPSILON * hi {
                let mid = 0.5 * (lo + hi);
                let f_mid = f(mid);
                if f_mid == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (f_mid < 0.0) == (f_lo < 0.0) {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push(0.5 * (lo + hi));
        }
        if cur != 0.0 {
            prev = cur;
        }
    }
    cuts.push(PI);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

fn adaptive_doubling<E, N>(start: usize, cap: usize, eval: E, norm: N) -> Result<(f64, usize)>
where
    E: Fn(usize) -> Result<f64>,
    N: Fn(f64) -> f64,
{
    let mut n = start.min(cap);
    let mut prev = eval(n)?;
    loop {
        let n2 = 2 * n;
        if n2 > cap {
            let last = norm(prev);
            return Err(Error::QuadratureNotConverged {
                last,
                previous: last,
            });
        }
        let next = eval(n2)?;
        if converged(prev, next) {
            return Ok((next, n2));
        }
        if 2 * n2 > cap {
            return Err(Error::QuadratureNotConverged {
                last: norm(next),
                previous: norm(prev),
            });
        }
        prev = next;
        n = n2;
    }
}

/// ‖u‖_q with the default grid cap.
pub fn lq_norm(u: &SpectralFunction) -> Result<f64> {
    lq_norm_with(u, &QuadratureSettings::default())
}

pub fn lq_norm_with(u: &SpectralFunction, settings: &QuadratureSettings) -> Result<f64> {
    Ok(lq_parts(u, settings)?.norm(u.geometry().q))
}

/// ‖u‖² − C‖u‖_q², C = S or Y. Tiny negative values are returned as computed.
pub fn deficit(u: &SpectralFunction) -> Result<f64> {
    deficit_with(u, &QuadratureSettings::default())
}

pub fn deficit_with(u: &SpectralFunction, settings: &QuadratureSettings) -> Result<f64> {
    Ok(stability_report_with(u, settings)?.deficit)
}

/// All scalars of one evaluation.
pub fn stability_report(u: &SpectralFunction) -> Result<DeficitReport> {
    stability_report_with(u, &QuadratureSettings::default())
}

pub fn stability_report_with(
    u: &SpectralFunction,
    settings: &QuadratureSettings,
) -> Result<DeficitReport> {
    let parts = lq_parts(u, settings)?;
    let g = u.geometry();
    let q = g.q;
    let norm_sq = h1_norm_sq(u);
    let (mean, fluctuation) = mean_project(u);
    let dist_sq = h1_norm_sq(&fluctuation);
    let deficit = if parts.base > 0.0 {
        // C‖ū‖_q² equals the energy of the constant part, so only the
        // relative growth of ∫|u|^q enters
        let constant_energy: f64 = u
            .mode_energies()
            .iter()
            .filter(|(mode, _)| *mode == (0, 0))
            .map(|(_, e)| e)
            .sum();
        let growth = ((2.0 / q) * (parts.excess / parts.base).ln_1p()).exp_m1();
        dist_sq - constant_energy * growth
    } else {
        norm_sq - g.sobolev_constant * parts.excess.powf(2.0 / q)
    };
    let quotient = (dist_sq > DEGENERATE_DIST_REL * norm_sq)
        .then(|| norm_sq * deficit / (dist_sq * dist_sq));
    Ok(DeficitReport {
        norm_sq,
        lq_norm: parts.norm(q),
        deficit,
        mean,
        dist_sq,
        quotient,
        quadrature_points: parts.points,
    })
}

/// Q[u] = ‖u‖²·deficit/‖u − ū‖⁴, failing for (numerically) constant input.
pub fn stability_quotient(u: &SpectralFunction) -> Result<f64> {
    stability_report(u)?.quotient.ok_or(Error::DegenerateDistance)
}
