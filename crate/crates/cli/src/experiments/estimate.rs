use rankdiv::divergence::rank_divergence;
use rankdiv::rng::derive_seed;
use rankdiv::sliced::{axis_corrected_divergence, sample_directions, sliced_rank_divergence};
use rankdiv::{EntropySpec, Error, Result, SampleSet, Samples1D};
use serde::Serialize;

use super::{route_label, DIRECTION_STREAM};
use crate::config::ExperimentConfig;
use crate::output::read_samples;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub kind: &'static str,
    #[serde(rename = "K")]
    pub order: usize,
    pub route: String,
    pub dim: usize,
    pub n_mu: usize,
    pub n_nu: usize,
    /// `univariate`, `sliced` or `axis`.
    pub method: &'static str,
    #[serde(rename = "L")]
    pub slices: usize,
    pub estimate: f64,
    /// `d × estimate` for sliced estimates, the estimate otherwise.
    pub dimension_scaled: f64,
}

/// One-shot estimate between two sample files, for every kind and order.
pub fn run_estimate(cfg: &ExperimentConfig) -> Result<Vec<EstimateRow>> {
    let (mu_path, nu_path) = cfg
        .mu_path
        .as_ref()
        .zip(cfg.nu_path.as_ref())
        .ok_or_else(|| Error::Config("estimate needs mu_path and nu_path".into()))?;
    let (a, da) = read_samples(mu_path)?;
    let (b, db) = read_samples(nu_path)?;
    if da != db {
        return Err(Error::DimensionMismatch { expected: da, got: db });
    }
    let d = da;
    let route = cfg.route();
    let seed = derive_seed(cfg.base_seed, 2);
    let mu = SampleSet::new(a, d, 0)?;
    let nu = SampleSet::new(b, d, 1)?;
    let dirs = if d > 1 && !cfg.axis {
        Some(sample_directions(d, cfg.slices, derive_seed(cfg.base_seed, DIRECTION_STREAM), false)?)
    } else {
        None
    };
    let (x, y) = if d == 1 {
        (Some(Samples1D::new(mu.data().to_vec(), 0)?), Some(Samples1D::new(nu.data().to_vec(), 1)?))
    } else {
        (None, None)
    };
    let mut rows = Vec::new();
    for &kind in &cfg.kinds {
        let spec = EntropySpec::new(kind);
        for &k in &cfg.orders {
            let (method, slices, estimate, scaled) = match (&x, &y, &dirs) {
                (Some(x), Some(y), _) => {
                    let v = rank_divergence(x, y, k, &spec, route, seed)?.value;
                    ("univariate", 0, v, v)
                }
                (_, _, Some(dirs)) => {
                    let e = sliced_rank_divergence(&mu, &nu, k, &spec, dirs, route, seed)?;
                    ("sliced", dirs.len(), e.value(), e.dimension_scaled())
                }
                _ => {
                    let v = axis_corrected_divergence(&mu, &nu, k, &spec, route, seed)?.value;
                    ("axis", 0, v, v)
                }
            };
            rows.push(EstimateRow {
                kind: kind.name(),
                order: k,
                route: route_label(cfg),
                dim: d,
                n_mu: mu.len(),
                n_nu: nu.len(),
                method,
                slices,
                estimate,
                dimension_scaled: scaled,
            });
        }
    }
    Ok(rows)
}
