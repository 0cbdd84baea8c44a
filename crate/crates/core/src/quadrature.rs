//! Gauss–Legendre quadrature: fixed rules, composite rules over breakpoints and
//! a globally adaptive bisection driver.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes nodes and weights by Newton iteration on the three-term
    /// recurrence of the Legendre polynomials.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess is accurate to O(n^-4).
            let k = i as f64 + 1.0;
            let theta = PI * (k - 0.25) / (nf + 0.5);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Sums the rule over consecutive panels `[breaks[k], breaks[k+1]]`.
    pub fn integrate_composite(&self, breaks: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
        breaks
            .windows(2)
            .map(|w| self.integrate(w[0], w[1], &mut f))
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Adaptive integration by recursive bisection with a 15-point rule,
/// accepting a panel when the two halves agree with the whole to `tol`
/// (absolute, scaled by panel share). Residuals at the rounding level of the
/// whole panel are accepted whatever the share.
pub fn adaptive(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64> {
    let rule = GaussLegendre::new(15);
    let whole = rule.integrate(a, b, &mut *f);
    let floor = if whole.is_finite() { 8.0 * f64::EPSILON * whole.abs() } else { 0.0 };
    adaptive_step(f, &rule, a, b, whole, tol, floor, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step(
    f: &mut impl FnMut(f64) -> f64,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    floor: f64,
    depth: u32,
) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let left = rule.integrate(a, mid, &mut *f);
    let right = rule.integrate(mid, b, &mut *f);
    let refined = left + right;
    if !refined.is_finite() {
        return Err(Error::Evaluation(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    if (refined - whole).abs() <= tol.max(floor) {
        return Ok(refined);
    }
    if depth == 0 {
        return Err(Error::Evaluation(format!(
            "adaptive quadrature did not converge on [{a}, {b}] (residual {:.3e})",
            (refined - whole).abs()
        )));
    }
    let l = adaptive_step(f, rule, a, mid, left, 0.5 * tol, floor, depth - 1)?;
    let r = adaptive_step(f, rule, mid, b, right, 0.5 * tol, floor, depth - 1)?;
    Ok(l + r)
}

/// Adaptive integration over consecutive panels, splitting the tolerance evenly.
pub fn adaptive_composite(
    f: &mut impl FnMut(f64) -> f64,
    breaks: &[f64],
    tol: f64,
    max_depth: u32,
) -> Result<f64> {
    let panels = breaks.len().saturating_sub(1).max(1) as f64;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            total += adaptive(f, w[0], w[1], tol / panels, max_depth)?;
        }
    }
    Ok(total)
}
