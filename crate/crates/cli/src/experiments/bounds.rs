use rankdiv::distributions::quantile_density_ratio;
use rankdiv::divergence::{default_quad_points, rank_divergence, rank_divergence_exact, theory_bounds};
use rankdiv::rng::derive_seed;
use rankdiv::{EntropySpec, Result};
use rayon::prelude::*;
use serde::Serialize;

use super::{mean_std, route_label};
use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRow {
    pub family: &'static str,
    pub param: f64,
    pub kind: &'static str,
    #[serde(rename = "K")]
    pub order: usize,
    pub n: usize,
    pub m: usize,
    pub route: String,
    pub trials: usize,
    pub delta: f64,
    pub lipschitz: f64,
    /// `D^(K)` from the quadrature-exact histogram.
    pub target: f64,
    /// Mean over trials of `|D̂ − D^(K)|`.
    pub trial_mean_error: f64,
    /// `L_f (K+1) √(2π) (1/√N + 1/√M)`.
    pub mean_bound: f64,
    pub mean_within_bound: bool,
    /// Concentration radius at level `delta`.
    pub radius: f64,
    /// Fraction of trials within `radius` of the trial mean.
    pub coverage: f64,
    pub coverage_ok: bool,
}

/// Monte Carlo check of the finite-sample mean bound and the concentration
/// radius. Trial `t` uses the repetition seed `base_seed + t`.
pub fn run_bounds(cfg: &ExperimentConfig) -> Result<Vec<BoundsRow>> {
    let route = cfg.route();
    let mut rows = Vec::new();
    for &param in &cfg.params {
        let (mu, nu) = cfg.family.pair_1d(param)?;
        let ratio = quantile_density_ratio(mu, nu)?;
        for &kind in &cfg.kinds {
            let spec = EntropySpec::new(kind);
            for &k in &cfg.orders {
                let target = rank_divergence_exact(&ratio, k, &spec, default_quad_points(k))?.value;
                for &n in &cfg.sizes {
                    let bounds = theory_bounds(&spec, k, n, n)?;
                    let radius = bounds.concentration_radius(cfg.delta)?;
                    let est: Vec<f64> = (0..cfg.trials)
                        .into_par_iter()
                        .map(|t| {
                            let s = cfg.run_seed(t);
                            let a = mu.sample(n, derive_seed(s, 0))?;
                            let b = nu.sample(n, derive_seed(s, 1))?;
                            Ok(rank_divergence(&a, &b, k, &spec, route, derive_seed(s, 2))?.value)
                        })
                        .collect::<Result<_>>()?;
                    let errors: Vec<f64> = est.iter().map(|e| (e - target).abs()).collect();
                    let trial_mean_error = mean_std(&errors).0;
                    let centre = mean_std(&est).0;
                    let inside = est.iter().filter(|e| (*e - centre).abs() <= radius).count();
                    let coverage = inside as f64 / cfg.trials as f64;
                    rows.push(BoundsRow {
                        family: cfg.family.name(),
                        param,
                        kind: kind.name(),
                        order: k,
                        n,
                        m: n,
                        route: route_label(cfg),
                        trials: cfg.trials,
                        delta: cfg.delta,
                        lipschitz: bounds.lipschitz,
                        target,
                        trial_mean_error,
                        mean_bound: bounds.finite_sample_mean_bound,
                        mean_within_bound: trial_mean_error <= bounds.finite_sample_mean_bound,
                        radius,
                        coverage,
                        coverage_ok: coverage >= 1.0 - cfg.delta,
                    });
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        a.param
            .total_cmp(&b.param)
            .then(a.kind.cmp(b.kind))
            .then(a.order.cmp(&b.order))
            .then(a.n.cmp(&b.n))
    });
    Ok(rows)
}
