use rankdiv::distributions::{quantile_density_ratio, ReferenceCache};
use rankdiv::divergence::{rank_divergence_exact, rank_divergence_exact_grid, rate_slope};
use rankdiv::{EntropySpec, Result};
use rayon::prelude::*;
use serde::Serialize;

use super::reference_1d_for;
use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub family: &'static str,
    pub param: f64,
    pub kind: &'static str,
    #[serde(rename = "K")]
    pub order: usize,
    /// `D^(K)` from the quadrature-exact histogram.
    pub exact: f64,
    pub reference: f64,
    /// `D − D^(K)`.
    pub gap: f64,
    /// `|1 − D^(K)/D|`.
    pub relative_gap: f64,
    /// Fitted log–log slope of the gap over the whole order grid; repeated
    /// on every row of the pair, NaN when some gap is not positive.
    pub slope: f64,
}

pub fn run_rates(cfg: &ExperimentConfig) -> Result<Vec<RateRow>> {
    let cache = ReferenceCache::open_default()?;
    let mut rows = Vec::new();
    for &param in &cfg.params {
        let (mu, nu) = cfg.family.pair_1d(param)?;
        let ratio = quantile_density_ratio(mu, nu)?;
        for &kind in &cfg.kinds {
            let spec = EntropySpec::new(kind);
            let reference = reference_1d_for(cfg, &cache, cfg.family, &mu, &nu, kind)?.value;
            let exact = if cfg.quad_points == 0 {
                rank_divergence_exact_grid(&ratio, &cfg.orders, &spec)?
            } else {
                cfg.orders
                    .par_iter()
                    .map(|&k| Ok(rank_divergence_exact(&ratio, k, &spec, cfg.quad_points)?.value))
                    .collect::<Result<Vec<f64>>>()?
            };
            let gaps: Vec<f64> = exact.iter().map(|e| reference - e).collect();
            let slope = rate_slope(&cfg.orders, &gaps).unwrap_or(f64::NAN);
            for ((&k, &e), &g) in cfg.orders.iter().zip(&exact).zip(&gaps) {
                rows.push(RateRow {
                    family: cfg.family.name(),
                    param,
                    kind: kind.name(),
                    order: k,
                    exact: e,
                    reference,
                    gap: g,
                    relative_gap: (1.0 - e / reference).abs(),
                    slope,
                });
            }
        }
    }
    rows.sort_by(|a, b| a.param.total_cmp(&b.param).then(a.kind.cmp(b.kind)).then(a.order.cmp(&b.order)));
    Ok(rows)
}
