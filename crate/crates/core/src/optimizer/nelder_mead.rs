//! Nelder–Mead simplex descent with the standard coefficients.

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    /// Stop once every vertex is this close to the best one (max norm).
    pub diameter_tol: f64,
    pub max_iterations: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            diameter_tol: 1e-9,
            max_iterations: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex whose edge
/// along coordinate i is `steps[i]`. `f` may return +∞ to reject a point.
pub fn minimize<F>(mut f: F, x0: &[f64], steps: &[f64], options: &Options) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(steps.len(), n);
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let v = eval(&x);
        simplex.push((x, v));
    }

    let mut iterations = 0;
    let mut converged = n == 0;
    while !converged && iterations < options.max_iterations {
        // stable sort keeps ties in insertion order
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if diameter(&simplex) < options.diameter_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);

        let worst = simplex[n].clone();
        let toward = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let best_v = simplex[0].1;
        let second_worst_v = simplex[n - 1].1;

        let xr = toward(REFLECT);
        let vr = eval(&xr);
        if vr < best_v {
            let xe = toward(REFLECT * EXPAND);
            let ve = eval(&xe);
            simplex[n] = if ve < vr { (xe, ve) } else { (xr, vr) };
            continue;
        }
        if vr < second_worst_v {
            simplex[n] = (xr, vr);
            continue;
        }
        let (xc, vc) = if vr < worst.1 {
            let xc = toward(REFLECT * CONTRACT);
            let vc = eval(&xc);
            (xc, vc)
        } else {
            let xc = toward(-CONTRACT);
            let vc = eval(&xc);
            (xc, vc)
        };
        if vc < vr.min(worst.1) {
            simplex[n] = (xc, vc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            for (xi, bi) in vertex.0.iter_mut().zip(&best) {
                *xi = bi + SHRINK * (*xi - bi);
            }
            vertex.1 = eval(&vertex.0);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    if !converged {
        converged = diameter(&simplex) < options.diameter_tol;
    }
    let (x, value) = simplex.swap_remove(0);
    Minimum {
        x,
        value,
        iterations,
        evaluations,
        converged,
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .flat_map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 4.0 * (x[1] + 2.0).powi(2);
        let m = minimize(f, &[0.0, 0.0], &[0.5, 0.5], &Options::default());
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-8 && (m.x[1] + 2.0).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let m = minimize(f, &[-1.2, 1.0], &[0.1, 0.1], &Options::default());
        assert!(m.value < 1e-12);
    }

    #[test]
    fn infinite_barrier_respected() {
        let f = |x: &[f64]| if x[0] < 0.5 { f64::INFINITY } else { x[0] };
        let m = minimize(f, &[2.0], &[0.3], &Options::default());
        assert!(m.x[0] >= 0.5 && m.value < 0.5 + 1e-8);
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| x.iter().map(|v| v.sin() + 0.1 * v * v).sum::<f64>();
        let x0 = [0.3, -2.0, 4.0];
        let m = minimize(f, &x0, &[0.2; 3], &Options::default());
        assert!(m.value <= f(&x0));
    }
}
