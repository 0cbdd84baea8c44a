//! Reference divergences: closed forms, one-dimensional quadrature and Monte
//! Carlo from known log-densities.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dist1d::{std_normal_cdf, std_normal_pdf, Dist1D};
use super::distnd::{gaussian_mass, DistND};
use super::ratio::TAIL_MASS;
use crate::entropy::{log_add_exp, EntropyKind, EntropySpec};
use crate::error::{domain, Error, Result};
use crate::quadrature::adaptive_composite;
use crate::rng::derive_seed;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// How a reference value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceRoute {
    ClosedForm,
    Quadrature,
    MonteCarlo,
    /// Moment-matched Gaussian stand-in; not a ground truth.
    GaussianProxy,
}

impl ReferenceRoute {
    pub fn name(self) -> &'static str {
        match self {
            Self::ClosedForm => "closed_form",
            Self::Quadrature => "quadrature",
            Self::MonteCarlo => "monte_carlo",
            Self::GaussianProxy => "gaussian_proxy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub value: f64,
    pub route: ReferenceRoute,
}

/// `KL(N(m0, s0²) ‖ N(m1, s1²))`.
pub fn kl_gaussian(m0: f64, s0: f64, m1: f64, s1: f64) -> f64 {
    let dm = m0 - m1;
    (s1 / s0).ln() + (s0 * s0 + dm * dm) / (2.0 * s1 * s1) - 0.5
}

/// `1 − ∫√(p q)` for two univariate Gaussians.
pub fn hellinger2_gaussian(m0: f64, s0: f64, m1: f64, s1: f64) -> f64 {
    1.0 - bhattacharyya_gaussian(m0, s0, m1, s1)
}

fn bhattacharyya_gaussian(m0: f64, s0: f64, m1: f64, s1: f64) -> f64 {
    let v = s0 * s0 + s1 * s1;
    let dm = m0 - m1;
    (2.0 * s0 * s1 / v).sqrt() * (-dm * dm / (4.0 * v)).exp()
}

/// `∫|p − q|` for two Gaussians with a common scale (twice the total variation).
pub fn tv_gaussian_shift(delta: f64, std: f64) -> f64 {
    2.0 * (2.0 * std_normal_cdf(0.5 * delta.abs() / std) - 1.0)
}

/// Closed-form divergences between diagonal Gaussians, per generator.
/// KL, reverse KL, Jeffreys and squared Hellinger are available in any
/// dimension; the `|t − 1|` generator only for a univariate common scale.
pub fn gaussian_closed_form(
    kind: EntropyKind,
    m0: &[f64],
    s0: &[f64],
    m1: &[f64],
    s1: &[f64],
) -> Option<f64> {
    let coords = || m0.iter().zip(s0).zip(m1.iter().zip(s1));
    let kl = |rev: bool| -> f64 {
        coords()
            .map(|((&a, &sa), (&b, &sb))| {
                if rev {
                    kl_gaussian(b, sb, a, sa)
                } else {
                    kl_gaussian(a, sa, b, sb)
                }
            })
            .sum()
    };
    match kind {
        EntropyKind::Kl => Some(kl(false)),
        EntropyKind::ReverseKl => Some(kl(true)),
        EntropyKind::Jeffreys => Some(kl(false) + kl(true)),
        EntropyKind::SqHellinger => Some(
            1.0 - coords()
                .map(|((&a, &sa), (&b, &sb))| bhattacharyya_gaussian(a, sa, b, sb))
                .product::<f64>(),
        ),
        EntropyKind::TotalVariation if m0.len() == 1 && s0[0] == s1[0] => {
            Some(tv_gaussian_shift(m0[0] - m1[0], s0[0]))
        }
        _ => None,
    }
}

/// `D_f(μ‖ν) = ∫ p_ν f(p_μ/p_ν)` by adaptive quadrature of the perspective in
/// the log domain. `panels` sets the initial quantile breakpoints per law.
///
/// The range stops at extreme tail quantiles. An integrand that is still
/// above one there has not decayed, and the divergence is reported as `+∞`.
pub fn continuous_divergence(
    mu: &Dist1D,
    nu: &Dist1D,
    spec: &EntropySpec,
    panels: usize,
) -> Result<f64> {
    let breaks = joint_breakpoints(&[*mu, *nu], panels.max(8));
    let mut integrand = |y: f64| spec.perspective_ln(mu.ln_pdf(y), nu.ln_pdf(y));
    let ends = [breaks[0], breaks[breaks.len() - 1]];
    if ends.iter().any(|&y| !(integrand(y) <= 1.0)) {
        return Ok(f64::INFINITY);
    }
    let v = adaptive_composite(&mut integrand, &breaks, 1e-13, 40)?;
    Ok(v.max(0.0))
}

/// Jensen–Shannon divergence (nats) by quadrature of the two-term expectation.
pub fn js_reference_quadrature(mu: &Dist1D, nu: &Dist1D, quad_points: usize) -> Result<f64> {
    continuous_divergence(
        mu,
        nu,
        &EntropySpec::new(EntropyKind::JensenShannon),
        quad_points,
    )
}

/// Best available univariate reference: a closed form when one exists,
/// quadrature otherwise.
pub fn reference_1d(mu: &Dist1D, nu: &Dist1D, spec: &EntropySpec) -> Result<Reference> {
    if let (
        Dist1D::Gaussian { mean: m0, std: s0 },
        Dist1D::Gaussian { mean: m1, std: s1 },
    ) = (*mu, *nu)
    {
        if let Some(v) = gaussian_closed_form(spec.kind, &[m0], &[s0], &[m1], &[s1]) {
            return Ok(Reference {
                value: v,
                route: ReferenceRoute::ClosedForm,
            });
        }
    }
    Ok(Reference {
        value: continuous_divergence(mu, nu, spec, 64)?,
        route: ReferenceRoute::Quadrature,
    })
}

fn joint_breakpoints(dists: &[Dist1D], panels: usize) -> Vec<f64> {
    let lo = dists
        .iter()
        .map(|d| d.quantile(TAIL_MASS))
        .fold(f64::INFINITY, f64::min);
    let hi = dists
        .iter()
        .map(|d| d.isf(TAIL_MASS))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut pts = vec![lo, hi];
    for d in dists {
        let (a, b) = d.support();
        pts.extend([a, b]);
        pts.extend((1..panels).map(|j| d.quantile(j as f64 / panels as f64)));
        for k in 1..=16 {
            let p = 10f64.powi(-k);
            pts.extend([d.quantile(p), d.isf(p)]);
        }
    }
    pts.retain(|x| x.is_finite() && *x >= lo && *x <= hi);
    pts.sort_by(f64::total_cmp);
    let scale = lo.abs().max(hi.abs()).max(1.0);
    pts.dedup_by(|b, a| (*b - *a).abs() <= 1e-13 * scale);
    pts
}

/// `KL(N(0, I) restricted to the box ‖ Uniform(box))`, summed over coordinates.
///
/// Per coordinate with `Z = Φ(b) − Φ(a)`, the truncated second moment is
/// `E[x²] = 1 + (aφ(a) − bφ(b))/Z`, and
/// `KL = −½ log 2π − log Z − ½E[x²] + log(b − a)`.
pub fn kl_truncgauss_vs_uniform(bounds: &[(f64, f64)]) -> Result<f64> {
    if bounds.is_empty() {
        return Err(domain("box must have at least one coordinate"));
    }
    let mut total = 0.0;
    for &(a, b) in bounds {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(domain(format!("invalid interval [{a}, {b}]")));
        }
        let z = gaussian_mass(a, b);
        let second = 1.0 + (a * std_normal_pdf(a) - b * std_normal_pdf(b)) / z;
        total += -LN_SQRT_2PI - z.ln() - 0.5 * second + (b - a).ln();
    }
    Ok(total)
}

/// `½KL(μ‖M) + ½KL(ν‖M)` where `M` is the Gaussian with the mean and
/// covariance of `½μ + ½ν`. A deterministic stand-in for the Jensen–Shannon
/// divergence between diagonal Gaussians, never an exact value.
pub fn js_gaussian_proxy(m0: &[f64], s0: &[f64], m1: &[f64], s1: &[f64]) -> Result<f64> {
    let d = m0.len();
    if [s0.len(), m1.len(), s1.len()].iter().any(|&l| l != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: s0.len().min(m1.len()).min(s1.len()),
        });
    }
    let a = DVector::from_column_slice(m0);
    let b = DVector::from_column_slice(m1);
    let diff = &a - &b;
    let mean = (&a + &b) * 0.5;
    let mut cov = &diff * diff.transpose() * 0.25;
    for j in 0..d {
        cov[(j, j)] += 0.5 * (s0[j] * s0[j] + s1[j] * s1[j]);
    }
    let chol = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Evaluation("mixture covariance is not positive definite".into()))?;
    let ln_det_m: f64 = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    let inv = chol.inverse();
    let kl_to_m = |m: &DVector<f64>, s: &[f64]| -> f64 {
        let sigma = DMatrix::from_diagonal(&DVector::from_iterator(d, s.iter().map(|x| x * x)));
        let ln_det: f64 = s.iter().map(|x| 2.0 * x.ln()).sum();
        let dm = &mean - m;
        let quad = (dm.transpose() * &inv * &dm)[(0, 0)];
        0.5 * ((&inv * sigma).trace() + quad - d as f64 + ln_det_m - ln_det)
    };
    Ok(0.5 * kl_to_m(&a, s0) + 0.5 * kl_to_m(&b, s1))
}

/// Anything with a log-density that can be sampled; lets Monte Carlo
/// references treat univariate and multivariate laws alike.
pub trait LogDensity: Sync {
    fn dim(&self) -> usize;
    fn ln_density(&self, x: &[f64]) -> f64;
    /// `n` draws, row-major.
    fn draw_rows(&self, n: usize, seed: u64) -> Result<Vec<f64>>;
    fn label(&self) -> String;
}

impl LogDensity for Dist1D {
    fn dim(&self) -> usize {
        1
    }
    fn ln_density(&self, x: &[f64]) -> f64 {
        self.ln_pdf(x[0])
    }
    fn draw_rows(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        Ok(self.sample(n, seed)?.values().to_vec())
    }
    fn label(&self) -> String {
        Dist1D::label(self)
    }
}

impl LogDensity for DistND {
    fn dim(&self) -> usize {
        DistND::dim(self)
    }
    fn ln_density(&self, x: &[f64]) -> f64 {
        self.ln_pdf(x)
    }
    fn draw_rows(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        Ok(self.sample(n, seed)?.into_data())
    }
    fn label(&self) -> String {
        DistND::label(self)
    }
}

/// A Monte Carlo reference with its standard error and the number of draws
/// dropped because the log-density ratio was not finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McReference {
    pub value: f64,
    pub std_error: f64,
    pub n_used: usize,
    pub skipped: usize,
}

struct Moments {
    mean: f64,
    var: f64,
    used: usize,
    skipped: usize,
}

fn mc_moments<D: LogDensity>(
    draw_from: &D,
    mu: &D,
    nu: &D,
    n: usize,
    seed: u64,
    term: impl Fn(f64, f64) -> f64 + Sync,
) -> Result<Moments> {
    let dim = draw_from.dim();
    let rows = draw_from.draw_rows(n, seed)?;
    let vals: Vec<f64> = rows
        .par_chunks(dim)
        .map(|x| term(mu.ln_density(x), nu.ln_density(x)))
        .collect();
    let (mut sum, mut used) = (0.0, 0usize);
    for &v in &vals {
        if v.is_finite() {
            sum += v;
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::Evaluation(
            "every Monte Carlo term was non-finite".into(),
        ));
    }
    let mean = sum / used as f64;
    let ss: f64 = vals
        .iter()
        .filter(|v| v.is_finite())
        .map(|v| (v - mean) * (v - mean))
        .sum();
    Ok(Moments {
        mean,
        var: ss / (used.max(2) - 1) as f64,
        used,
        skipped: n - used,
    })
}

/// Plug-in Monte Carlo estimate of `D_f(μ‖ν)` from `n_ref` draws of each law
/// (draws from `μ` use stream 0 of `seed`, draws from `ν` stream 1).
///
/// KL and squared Hellinger average under `μ`; reverse KL, `χ²`, TV and the
/// triangular discrimination under `ν`; JS and Jeffreys combine both.
pub fn mc_reference<D: LogDensity>(
    mu: &D,
    nu: &D,
    kind: EntropyKind,
    n_ref: usize,
    seed: u64,
) -> Result<McReference> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            got: nu.dim(),
        });
    }
    if n_ref == 0 {
        return Err(domain("n_ref must be positive"));
    }
    let s_mu = derive_seed(seed, 0);
    let s_nu = derive_seed(seed, 1);
    let spec = EntropySpec::new(kind);
    let one = |m: Moments| McReference {
        value: m.mean,
        std_error: (m.var / m.used as f64).sqrt(),
        n_used: m.used,
        skipped: m.skipped,
    };
    let two = |a: Moments, b: Moments, wa: f64, wb: f64| McReference {
        value: wa * a.mean + wb * b.mean,
        std_error: (wa * wa * a.var / a.used as f64 + wb * wb * b.var / b.used as f64).sqrt(),
        n_used: a.used + b.used,
        skipped: a.skipped + b.skipped,
    };
    // Terms are written as functions of (log p_μ, log p_ν) at the draw.
    Ok(match kind {
        EntropyKind::Kl => one(mc_moments(mu, mu, nu, n_ref, s_mu, |lp, lq| lp - lq)?),
        EntropyKind::SqHellinger => one(mc_moments(mu, mu, nu, n_ref, s_mu, |lp, lq| {
            1.0 - (0.5 * (lq - lp)).exp()
        })?),
        EntropyKind::ReverseKl => one(mc_moments(nu, mu, nu, n_ref, s_nu, |lp, lq| lq - lp)?),
        EntropyKind::ChiSq | EntropyKind::TotalVariation | EntropyKind::TriangularDiscrimination => {
            one(mc_moments(nu, mu, nu, n_ref, s_nu, |lp, lq| {
                spec.value((lp - lq).exp())
            })?)
        }
        EntropyKind::JensenShannon => {
            let a = mc_moments(mu, mu, nu, n_ref, s_mu, |lp, lq| {
                LN_2 + lp - log_add_exp(lp, lq)
            })?;
            let b = mc_moments(nu, mu, nu, n_ref, s_nu, |lp, lq| {
                LN_2 + lq - log_add_exp(lp, lq)
            })?;
            two(a, b, 0.5, 0.5)
        }
        EntropyKind::Jeffreys => {
            let a = mc_moments(mu, mu, nu, n_ref, s_mu, |lp, lq| lp - lq)?;
            let b = mc_moments(nu, mu, nu, n_ref, s_nu, |lp, lq| lq - lp)?;
            two(a, b, 1.0, 1.0)
        }
    })
}
