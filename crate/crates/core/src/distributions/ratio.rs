use super::dist1d::Dist1D;
use crate::error::{domain, Error, Result};

/// Evaluations of the ratio in the quantile domain are clamped to
/// `[RATIO_WINDOW, 1 − RATIO_WINDOW]`.
pub const RATIO_WINDOW: f64 = 1e-9;

/// Tail mass ignored at either end when integrating against a density.
pub(crate) const TAIL_MASS: f64 = 1e-17;

/// The density ratio `dμ/dν` read through the quantile function of `ν`,
/// `u ↦ p_μ(Q_ν(u)) / p_ν(Q_ν(u))`. `μ` may be a finite mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileDensityRatio {
    mu: Vec<(f64, Dist1D)>,
    nu: Dist1D,
}

/// `r = dμ/dν ∘ Q_ν` for two univariate laws with `μ ≪ ν`.
pub fn quantile_density_ratio(mu: Dist1D, nu: Dist1D) -> Result<QuantileDensityRatio> {
    QuantileDensityRatio::mixture(vec![(1.0, mu)], nu)
}

impl QuantileDensityRatio {
    /// `μ = Σ w_k μ_k` with positive weights summing to one.
    pub fn mixture(components: Vec<(f64, Dist1D)>, nu: Dist1D) -> Result<Self> {
        let nu = nu.validated()?;
        if components.is_empty() {
            return Err(domain("a mixture needs at least one component"));
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        if components.iter().any(|c| !(c.0 > 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(domain("mixture weights must be positive and sum to one"));
        }
        let (nu_lo, nu_hi) = nu.support();
        for (_, d) in &components {
            let d = d.validated()?;
            let (lo, hi) = d.support();
            if lo < nu_lo || hi > nu_hi {
                return Err(domain(format!(
                    "{} is not absolutely continuous with respect to {}",
                    d.label(),
                    nu.label()
                )));
            }
        }
        Ok(Self {
            mu: components,
            nu,
        })
    }

    /// Equal mixture of the two `μ`'s; both ratios must share `ν`.
    pub fn midpoint(&self, other: &Self) -> Result<Self> {
        if self.nu != other.nu {
            return Err(domain("midpoint needs a common reference law"));
        }
        let comps = self
            .mu
            .iter()
            .chain(&other.mu)
            .map(|&(w, d)| (0.5 * w, d))
            .collect();
        Self::mixture(comps, self.nu)
    }

    pub fn nu(&self) -> &Dist1D {
        &self.nu
    }

    pub fn mu_components(&self) -> &[(f64, Dist1D)] {
        &self.mu
    }

    /// True when `μ` and `ν` are the same law, so the ratio is identically one.
    pub fn is_identity(&self) -> bool {
        self.mu.len() == 1 && self.mu[0].1 == self.nu
    }

    pub fn mu_pdf(&self, y: f64) -> f64 {
        self.mu.iter().map(|(w, d)| w * d.pdf(y)).sum()
    }

    /// `p_μ(y) / p_ν(y)` at a point of the sample space.
    pub fn at_point(&self, y: f64) -> f64 {
        let ln_nu = self.nu.ln_pdf(y);
        self.mu
            .iter()
            .map(|(w, d)| w * (d.ln_pdf(y) - ln_nu).exp())
            .sum()
    }

    /// `r(u)` with `u` clamped to the evaluation window.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if u.is_nan() {
            return Err(domain("ratio evaluated at NaN"));
        }
        let u = u.clamp(RATIO_WINDOW, 1.0 - RATIO_WINDOW);
        let r = self.at_point(self.nu.quantile(u));
        if r.is_finite() {
            Ok(r)
        } else {
            Err(Error::Evaluation(format!("ratio is not finite at u = {u}")))
        }
    }

    /// Integration range and panel breakpoints in the sample space.
    ///
    /// Breakpoints sit at the `j/panels` quantiles of `ν` and of every `μ`
    /// component, plus geometric tail levels, restricted to where `μ` carries
    /// all but `TAIL_MASS` of its mass.
    pub(crate) fn breakpoints(&self, panels: usize) -> Vec<f64> {
        let (nu_lo, nu_hi) = self.nu.support();
        let lo = self
            .mu
            .iter()
            .map(|(_, d)| d.quantile(TAIL_MASS))
            .fold(f64::INFINITY, f64::min)
            .max(nu_lo);
        let hi = self
            .mu
            .iter()
            .map(|(_, d)| d.isf(TAIL_MASS))
            .fold(f64::NEG_INFINITY, f64::max)
            .min(nu_hi);
        let levels: Vec<f64> = (1..panels).map(|j| j as f64 / panels as f64).collect();
        let tails: Vec<f64> = (1..=16).map(|k| 10f64.powi(-k)).collect();
        let mut pts = vec![lo, hi];
        let dists = std::iter::once(&self.nu).chain(self.mu.iter().map(|(_, d)| d));
        for d in dists {
            pts.extend(levels.iter().map(|&u| d.quantile(u)));
            pts.extend(tails.iter().map(|&p| d.quantile(p)));
            pts.extend(tails.iter().map(|&p| d.isf(p)));
        }
        pts.retain(|x| x.is_finite() && *x >= lo && *x <= hi);
        pts.sort_by(f64::total_cmp);
        let scale = hi.abs().max(lo.abs()).max(1.0);
        pts.dedup_by(|b, a| (*b - *a).abs() <= 1e-13 * scale);
        pts
    }
}
