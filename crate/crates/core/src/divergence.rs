//! Discrete f-divergences on `{0, …, K}` and the rank-statistic divergence.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::QuantileDensityRatio;
use crate::entropy::{EntropyKind, EntropySpec};
use crate::error::{domain, Result};
use crate::univariate::{
    rank_pmf_counted, rank_pmf_exact, rank_pmf_smoothed, Provenance, RankHistogram, Samples1D,
};

/// How the rank histogram is estimated from samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum Route {
    /// Resample `K` reference draws per point and count.
    Counted,
    /// Average Bernstein polynomials at the (smoothed) empirical CDF.
    Smoothed { tau: f64 },
}

impl Route {
    /// The hard-rank smoothed route (`τ = 0`).
    pub const HARD: Route = Route::Smoothed { tau: 0.0 };

    pub fn provenance(self) -> Provenance {
        match self {
            Self::Counted => Provenance::Counted,
            Self::Smoothed { .. } => Provenance::Smoothed,
        }
    }
}

/// A rank divergence value with enough context to reproduce it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceEstimate {
    pub value: f64,
    #[serde(rename = "K")]
    pub order: usize,
    pub entropy: EntropyKind,
    pub provenance: Provenance,
    /// Smoothing temperature for the smoothed route.
    pub tau: Option<f64>,
    pub n_mu: usize,
    pub n_nu: usize,
    pub seed: u64,
}

impl DivergenceEstimate {
    /// True when an empty bin met a generator that is infinite at zero.
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// `(1/(K+1)) Σ_n f((K+1) P(n))`.
///
/// Empty bins contribute `f(0)`; for generators that are infinite at zero the
/// result is `+∞` rather than a clamped finite value, so the estimate never
/// silently exceeds the quantity it bounds. Rounding below zero is clipped.
pub fn discrete_f_divergence(p: &RankHistogram, spec: &EntropySpec) -> f64 {
    let k1 = (p.order() + 1) as f64;
    let mut acc = 0.0;
    for &q in p.probs() {
        if q == 0.0 && spec.infinite_at_zero() {
            return f64::INFINITY;
        }
        acc += spec.value(k1 * q);
    }
    (acc / k1).max(0.0)
}

/// `(D^(K)_TV(P), Σ_n |P(n) − 1/(K+1)|)`; the two agree identically.
pub fn tv_isl_identity_check(p: &RankHistogram) -> (f64, f64) {
    let tv = discrete_f_divergence(p, &EntropySpec::new(EntropyKind::TotalVariation));
    let u = 1.0 / (p.order() + 1) as f64;
    let isl = p.probs().iter().map(|q| (q - u).abs()).sum();
    (tv, isl)
}

/// Rank divergence estimated from two samples.
pub fn rank_divergence(
    mu: &Samples1D,
    nu: &Samples1D,
    order: usize,
    spec: &EntropySpec,
    route: Route,
    seed: u64,
) -> Result<DivergenceEstimate> {
    let (hist, tau) = match route {
        Route::Counted => (rank_pmf_counted(mu, nu, order, seed)?, None),
        Route::Smoothed { tau } => (rank_pmf_smoothed(mu, nu, order, tau)?, Some(tau)),
    };
    Ok(DivergenceEstimate {
        value: discrete_f_divergence(&hist, spec),
        order,
        entropy: spec.kind,
        provenance: route.provenance(),
        tau,
        n_mu: mu.len(),
        n_nu: nu.len(),
        seed,
    })
}

/// Default quadrature panel count for order `K`.
pub fn default_quad_points(order: usize) -> usize {
    if order > 256 {
        2048
    } else {
        512
    }
}

/// Noise-free rank divergence from the exact pmf.
pub fn rank_divergence_exact(
    ratio: &QuantileDensityRatio,
    order: usize,
    spec: &EntropySpec,
    quad_points: usize,
) -> Result<DivergenceEstimate> {
    let hist = rank_pmf_exact(ratio, order, quad_points)?;
    Ok(DivergenceEstimate {
        value: discrete_f_divergence(&hist, spec),
        order,
        entropy: spec.kind,
        provenance: Provenance::QuadratureExact,
        tau: None,
        n_mu: 0,
        n_nu: 0,
        seed: 0,
    })
}

/// [`rank_divergence_exact`] over a grid of orders, in parallel, results in
/// grid order, each with its default panel count.
pub fn rank_divergence_exact_grid(
    ratio: &QuantileDensityRatio,
    orders: &[usize],
    spec: &EntropySpec,
) -> Result<Vec<f64>> {
    orders
        .par_iter()
        .map(|&k| rank_divergence_exact(ratio, k, spec, default_quad_points(k)).map(|e| e.value))
        .collect()
}

/// Sample-size bounds on the error of the count-based estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryBounds {
    pub lipschitz: f64,
    #[serde(rename = "K")]
    pub order: usize,
    pub n: usize,
    pub m: usize,
    /// `L_f (K+1) √(2π) (1/√N + 1/√M)`.
    pub finite_sample_mean_bound: f64,
}

impl TheoryBounds {
    /// `L_f (K+1) √(2 log(2/δ) (1/N + 1/M))`: with probability at least
    /// `1 − δ` the estimate lies within this radius of its mean.
    pub fn concentration_radius(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(domain(format!("δ must lie in (0, 1), got {delta}")));
        }
        let inv = 1.0 / self.n as f64 + 1.0 / self.m as f64;
        Ok(self.lipschitz
            * (self.order + 1) as f64
            * (2.0 * (2.0 / delta).ln() * inv).sqrt())
    }
}

pub fn theory_bounds(spec: &EntropySpec, order: usize, n: usize, m: usize) -> Result<TheoryBounds> {
    if n == 0 || m == 0 {
        return Err(domain("sample sizes must be at least 1"));
    }
    let k1 = (order + 1) as f64;
    let lipschitz = spec.lipschitz_bound(k1);
    let bound = lipschitz
        * k1
        * (2.0 * std::f64::consts::PI).sqrt()
        * (1.0 / (n as f64).sqrt() + 1.0 / (m as f64).sqrt());
    Ok(TheoryBounds {
        lipschitz,
        order,
        n,
        m,
        finite_sample_mean_bound: bound,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(domain("slope fit needs at least two paired points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(domain("slope fit needs positive finite values"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

/// Fitted exponent of `D − D^(K)` against `K` over the whole grid.
pub fn rate_slope(orders: &[usize], gaps: &[f64]) -> Result<f64> {
    let xs: Vec<f64> = orders.iter().map(|&k| k as f64).collect();
    log_log_slope(&xs, gaps)
}
