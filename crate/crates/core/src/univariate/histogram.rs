use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bernstein::BernsteinBasis;
use super::samples::Samples1D;
use crate::distributions::QuantileDensityRatio;
use crate::error::{domain, Error, Result};
use crate::quadrature::GaussLegendre;
use crate::rng::rng;

/// Tolerance on `Σ probs − 1` accepted by [`RankHistogram::new`].
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Samples per parallel block; partial sums are combined in block order.
const BLOCK: usize = 2048;

/// Nodes of the Gauss–Legendre rule applied on each quadrature panel.
const PANEL_RULE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Counted,
    Smoothed,
    QuadratureExact,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Self::Counted => "counted",
            Self::Smoothed => "smoothed",
            Self::QuadratureExact => "quadrature_exact",
        }
    }
}

/// A probability mass function on `{0, …, K}`: the law of the rank of a `μ`
/// draw among `K` draws from `ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHistogram")]
pub struct RankHistogram {
    #[serde(rename = "K")]
    order: usize,
    probs: Vec<f64>,
    provenance: Provenance,
}

#[derive(Deserialize)]
struct RawHistogram {
    #[serde(rename = "K")]
    order: usize,
    probs: Vec<f64>,
    provenance: Provenance,
}

impl TryFrom<RawHistogram> for RankHistogram {
    type Error = Error;
    fn try_from(raw: RawHistogram) -> Result<Self> {
        if raw.probs.len() != raw.order + 1 {
            return Err(domain(format!(
                "K = {} needs {} probabilities, got {}",
                raw.order,
                raw.order + 1,
                raw.probs.len()
            )));
        }
        Self::new(raw.probs, raw.provenance)
    }
}

impl RankHistogram {
    /// Validates nonnegativity and unit mass (within [`MASS_TOLERANCE`]).
    pub fn new(probs: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if probs.is_empty() {
            return Err(domain("a rank histogram needs at least one bin"));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(domain(format!("invalid bin probability {p}")));
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(domain(format!("probabilities sum to {mass}, not 1")));
        }
        Ok(Self {
            order: probs.len() - 1,
            probs,
            provenance,
        })
    }

    /// The uniform pmf `1/(K+1)` on every bin.
    pub fn uniform(order: usize, provenance: Provenance) -> Self {
        Self {
            order,
            probs: vec![1.0 / (order + 1) as f64; order + 1],
            provenance,
        }
    }

    /// The resolution `K`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Number of reference draws at or below `x` (ties count as below).
pub fn rank_count(x: f64, reference_draws: &[f64]) -> usize {
    reference_draws.iter().filter(|&&y| y <= x).count()
}

/// Count-based estimate: for every `μ` draw, `K` fresh draws with replacement
/// from the `ν` sample are ranked against it.
pub fn rank_pmf_counted(
    mu: &Samples1D,
    nu: &Samples1D,
    order: usize,
    seed: u64,
) -> Result<RankHistogram> {
    let m = nu.len();
    let mut counts = vec![0u64; order + 1];
    let mut r = rng(seed);
    for &x in mu.values() {
        // A resampled index j satisfies sorted[j] ≤ x exactly when j < c.
        let c = nu.count_le(x);
        let rank = if c == m {
            order
        } else if c == 0 {
            0
        } else {
            (0..order).filter(|_| r.random_range(0..m) < c).count()
        };
        counts[rank] += 1;
    }
    let n = mu.len() as f64;
    RankHistogram::new(
        counts.into_iter().map(|c| c as f64 / n).collect(),
        Provenance::Counted,
    )
}

/// `(1/N) Σ_i b_{n,K}(U_i)` for rank coordinates `U_i ∈ [0, 1]`.
pub fn bernstein_pmf(us: &[f64], order: usize) -> Vec<f64> {
    let basis = BernsteinBasis::new(order);
    let partials: Vec<Vec<f64>> = us
        .par_chunks(BLOCK)
        .map(|block| {
            let mut acc = vec![0.0; order + 1];
            let mut row = vec![0.0; order + 1];
            for &u in block {
                let r = basis.eval_support(u, 1.0 - u, &mut row);
                for (a, b) in acc[r.clone()].iter_mut().zip(&row[r]) {
                    *a += b;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; order + 1];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    let n = us.len() as f64;
    total.iter_mut().for_each(|t| *t /= n);
    total
}

/// Smoothed estimate `(1/N) Σ_i b_{n,K}(U_i)` with `U_i` the empirical CDF of
/// `ν` at `X_i` (`tau = 0`) or its logistic smoothing at temperature `tau`.
pub fn rank_pmf_smoothed(
    mu: &Samples1D,
    nu: &Samples1D,
    order: usize,
    tau: f64,
) -> Result<RankHistogram> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(domain(format!("temperature must be finite and ≥ 0, got {tau}")));
    }
    let us: Vec<f64> = mu
        .values()
        .par_chunks(BLOCK)
        .flat_map_iter(|xs| nu.cdf_many(xs, tau))
        .collect();
    RankHistogram::new(bernstein_pmf(&us, order), Provenance::Smoothed)
}

/// Noise-free pmf `Q(n) = ∫ b_{n,K}(F_ν(y)) dμ(y)` by composite
/// Gauss–Legendre quadrature, renormalised to unit mass.
///
/// `quad_points` is the number of quantile panels laid over each law
/// (16 nodes per panel). Returns the histogram and the raw quadrature mass
/// before renormalisation.
pub fn rank_pmf_exact_with_mass(
    ratio: &QuantileDensityRatio,
    order: usize,
    quad_points: usize,
) -> Result<(RankHistogram, f64)> {
    if quad_points < 64 {
        return Err(domain("rank_pmf_exact needs at least 64 quadrature panels"));
    }
    let rule = GaussLegendre::new(PANEL_RULE);
    let basis = BernsteinBasis::new(order);
    let nu = *ratio.nu();

    // Each panel yields a partial pmf; panels are summed in order.
    let accumulate = |nodes: Vec<(f64, f64, f64)>| -> Result<Vec<f64>> {
        let mut acc = vec![0.0; order + 1];
        let mut row = vec![0.0; order + 1];
        for (u, v, w) in nodes {
            if !w.is_finite() {
                return Err(Error::Evaluation(format!(
                    "non-finite quadrature weight at u = {u}"
                )));
            }
            if w == 0.0 {
                continue;
            }
            basis.eval_into(u, v, &mut row);
            for (a, b) in acc.iter_mut().zip(&row) {
                *a += w * b;
            }
        }
        Ok(acc)
    };

    if ratio.is_identity() {
        // r ≡ 1: every basis polynomial integrates to 1/(K+1) on [0, 1].
        return Ok((RankHistogram::uniform(order, Provenance::QuadratureExact), 1.0));
    }
    let partials: Vec<Vec<f64>> = {
        let breaks = ratio.breakpoints(quad_points);
        breaks
            .par_windows(2)
            .map(|w| {
                accumulate(
                    rule.mapped(w[0], w[1])
                        .map(|(y, wt)| (nu.cdf(y), nu.sf(y), wt * ratio.mu_pdf(y)))
                        .collect(),
                )
            })
            .collect::<Result<_>>()?
    };
    let mut probs = vec![0.0; order + 1];
    for p in partials {
        for (t, v) in probs.iter_mut().zip(p) {
            *t += v;
        }
    }
    let mass: f64 = probs.iter().sum();
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::Evaluation(format!("quadrature mass is {mass}")));
    }
    probs.iter_mut().for_each(|p| *p = (*p / mass).max(0.0));
    Ok((RankHistogram::new(probs, Provenance::QuadratureExact)?, mass))
}

/// [`rank_pmf_exact_with_mass`] without the diagnostic mass.
pub fn rank_pmf_exact(
    ratio: &QuantileDensityRatio,
    order: usize,
    quad_points: usize,
) -> Result<RankHistogram> {
    rank_pmf_exact_with_mass(ratio, order, quad_points).map(|(h, _)| h)
}
