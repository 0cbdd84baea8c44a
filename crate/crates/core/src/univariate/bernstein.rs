//! Bernstein polynomials `b_{n,K}(u) = C(K,n) uⁿ (1−u)^{K−n}`.
//!
//! All `K+1` values are produced in `O(K)`: the term at the binomial mode is
//! evaluated in log space and the remaining terms follow from the ratio
//! `b_{n+1}/b_n = (K−n)/(n+1) · u/(1−u)`, walking outward so every step
//! shrinks the term. Nothing overflows for large orders and tails underflow
//! cleanly to zero. The row is finally rescaled by its sum, which is one in
//! exact arithmetic.

use std::ops::Range;

/// Terms smaller than this fraction of the peak are left at zero. The
/// recurrence only shrinks away from the mode, so everything beyond the first
/// such term is smaller still.
const TAIL_CUTOFF: f64 = 1e-20;

/// Log-binomials and neighbour ratios of one order.
#[derive(Debug, Clone)]
struct Row {
    order: usize,
    ln_binom: Vec<f64>,
    /// `(K − n)/(n + 1)`, the ratio `C(K, n+1)/C(K, n)`.
    up: Vec<f64>,
    /// `(n + 1)/(K − n)`, its reciprocal.
    down: Vec<f64>,
}

impl Row {
    fn new(k: usize) -> Self {
        Self {
            order: k,
            ln_binom: ln_binomial_row(k),
            up: (0..k).map(|n| (k - n) as f64 / (n + 1) as f64).collect(),
            down: (0..k).map(|n| (n + 1) as f64 / (k - n) as f64).collect(),
        }
    }

    /// Writes the nonnegligible terms into `out` and returns their index
    /// range; entries outside it are not touched.
    fn fill(&self, u: f64, v: f64, out: &mut [f64]) -> Range<usize> {
        let k = self.order;
        debug_assert_eq!(out.len(), k + 1);
        if u <= 0.0 {
            out[0] = 1.0;
            return 0..1;
        }
        if v <= 0.0 {
            out[k] = 1.0;
            return k..k + 1;
        }
        let mode = ((u * (k + 1) as f64).floor() as usize).min(k);
        let peak = (self.ln_binom[mode] + mode as f64 * u.ln() + (k - mode) as f64 * v.ln()).exp();
        let floor = peak * TAIL_CUTOFF;
        out[mode] = peak;
        let mut total = peak;
        let ratio = u / v;
        let mut b = peak;
        let mut hi = mode + 1;
        for (o, &c) in out[mode + 1..].iter_mut().zip(&self.up[mode..]) {
            b *= c * ratio;
            if b < floor {
                break;
            }
            *o = b;
            total += b;
            hi += 1;
        }
        let ratio = v / u;
        b = peak;
        let mut lo = mode;
        for (o, &c) in out[..mode].iter_mut().rev().zip(self.down[..mode].iter().rev()) {
            b *= c * ratio;
            if b < floor {
                break;
            }
            *o = b;
            total += b;
            lo -= 1;
        }
        // The rounding in the log-space peak is shared by every term; dividing
        // by the row sum removes it.
        let inv = 1.0 / total;
        out[lo..hi].iter_mut().for_each(|x| *x *= inv);
        lo..hi
    }
}

/// Precomputed tables for one order `K` (and `K − 1`, for derivatives).
#[derive(Debug, Clone)]
pub struct BernsteinBasis {
    row: Row,
    lower: Option<Row>,
}

impl BernsteinBasis {
    pub fn new(order: usize) -> Self {
        Self {
            row: Row::new(order),
            lower: (order > 0).then(|| Row::new(order - 1)),
        }
    }

    pub fn order(&self) -> usize {
        self.row.order
    }

    /// `[b_{0,K}(u), …, b_{K,K}(u)]`.
    pub fn eval(&self, u: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.order() + 1];
        self.eval_into(u, 1.0 - u, &mut out);
        out
    }

    /// Fills `out` with the basis at `u`, taking `v = 1 − u` separately so
    /// callers holding an accurate survival probability keep its precision.
    pub fn eval_into(&self, u: f64, v: f64, out: &mut [f64]) {
        let r = self.row.fill(u, v, out);
        out[..r.start].fill(0.0);
        out[r.end..].fill(0.0);
    }

    /// Like [`eval_into`](Self::eval_into) but only writes the terms above
    /// `1e-20` of the largest one and returns their range. Entries outside the
    /// range keep whatever they held.
    pub fn eval_support(&self, u: f64, v: f64, out: &mut [f64]) -> Range<usize> {
        self.row.fill(u, v, out)
    }

    /// `[b'_{0,K}(u), …, b'_{K,K}(u)]` via `b'_{n,K} = K (b_{n−1,K−1} − b_{n,K−1})`.
    pub fn derivative(&self, u: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.order() + 1];
        let mut scratch = vec![0.0; self.order().max(1)];
        self.derivative_into(u, 1.0 - u, &mut scratch, &mut out);
        out
    }

    /// Derivative into `out` (length `K+1`) using `scratch` (length ≥ `K`).
    pub fn derivative_into(&self, u: f64, v: f64, scratch: &mut [f64], out: &mut [f64]) {
        let r = self.derivative_support(u, v, scratch, out);
        out[..r.start].fill(0.0);
        out[r.end..].fill(0.0);
    }

    /// Sparse form of [`derivative_into`](Self::derivative_into), as for
    /// [`eval_support`](Self::eval_support).
    pub fn derivative_support(&self, u: f64, v: f64, scratch: &mut [f64], out: &mut [f64]) -> Range<usize> {
        let Some(lower) = &self.lower else {
            out[0] = 0.0;
            return 0..1;
        };
        let k = self.order();
        let lower_vals = &mut scratch[..k];
        let r = lower.fill(u, v, lower_vals);
        let kf = k as f64;
        // b'_n = K (b_{n−1} − b_n) with the lower row zero outside r
        let (lo, hi) = (r.start, r.end);
        out[lo] = -kf * lower_vals[lo];
        for n in lo + 1..hi {
            out[n] = kf * (lower_vals[n - 1] - lower_vals[n]);
        }
        out[hi] = kf * lower_vals[hi - 1];
        r.start..r.end + 1
    }
}

fn ln_binomial_row(k: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(k + 1);
    let mut acc = 0.0f64;
    row.push(0.0);
    for n in 0..k {
        acc += ((k - n) as f64 / (n + 1) as f64).ln();
        row.push(acc);
    }
    // symmetrise to halve the accumulated rounding
    for n in 0..=k / 2 {
        let m = 0.5 * (row[n] + row[k - n]);
        row[n] = m;
        row[k - n] = m;
    }
    row
}

/// All `K+1` Bernstein polynomials of order `K` at `u ∈ [0, 1]`.
pub fn bernstein_basis(order: usize, u: f64) -> Vec<f64> {
    BernsteinBasis::new(order).eval(u)
}

/// Derivatives of all `K+1` Bernstein polynomials of order `K ≥ 1` at `u`.
pub fn bernstein_basis_derivative(order: usize, u: f64) -> Vec<f64> {
    BernsteinBasis::new(order).derivative(u)
}
