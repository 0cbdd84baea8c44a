use rankdiv::distributions::{benchmark_box, kl_truncgauss_vs_uniform, ReferenceCache};
use rankdiv::divergence::rank_divergence;
use rankdiv::rng::derive_seed;
use rankdiv::sliced::{axis_corrected_divergence, sample_directions, sliced_rank_divergence};
use rankdiv::{DistND, EntropyKind, EntropySpec, Result};
use serde::Serialize;

use super::{mean_std, over_seeds, reference_1d_for, reference_nd_for, route_label};
use crate::config::ExperimentConfig;

/// Stream of the base seed that fixes the directions of a sliced experiment.
pub const DIRECTION_STREAM: u64 = 3;

/// Above this many sample entries per law, repetitions run one at a time.
const CONCURRENT_ENTRIES: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bench1dRow {
    pub family: &'static str,
    pub param: f64,
    pub kind: &'static str,
    #[serde(rename = "K")]
    pub order: usize,
    pub n: usize,
    pub route: String,
    pub seeds: usize,
    pub mean_ratio: f64,
    pub std_ratio: f64,
    pub mean_estimate: f64,
    pub reference: f64,
    pub reference_route: &'static str,
}

/// Univariate estimate over reference, per (param, kind, K, n), over seeds.
/// Repetition `s` draws `μ` from stream 0, `ν` from stream 1 and the
/// estimator's own randomness from stream 2.
pub fn run_bench1d(cfg: &ExperimentConfig) -> Result<Vec<Bench1dRow>> {
    let cache = ReferenceCache::open_default()?;
    let route = cfg.route();
    let mut rows = Vec::new();
    for &param in &cfg.params {
        let (mu, nu) = cfg.family.pair_1d(param)?;
        let refs = cfg
            .kinds
            .iter()
            .map(|&k| reference_1d_for(cfg, &cache, cfg.family, &mu, &nu, k))
            .collect::<Result<Vec<_>>>()?;
        for &n in &cfg.sizes {
            let per_seed = over_seeds(cfg, n > CONCURRENT_ENTRIES, |s| {
                let a = mu.sample(n, derive_seed(s, 0))?;
                let b = nu.sample(n, derive_seed(s, 1))?;
                let mut out = Vec::with_capacity(cfg.kinds.len() * cfg.orders.len());
                for &kind in &cfg.kinds {
                    for &k in &cfg.orders {
                        let spec = EntropySpec::new(kind);
                        out.push(rank_divergence(&a, &b, k, &spec, route, derive_seed(s, 2))?.value);
                    }
                }
                Ok(out)
            })?;
            for (i, (&kind, r)) in cfg.kinds.iter().zip(&refs).enumerate() {
                for (j, &k) in cfg.orders.iter().enumerate() {
                    let col = i * cfg.orders.len() + j;
                    let est: Vec<f64> = per_seed.iter().map(|v| v[col]).collect();
                    let ratios: Vec<f64> = est.iter().map(|e| e / r.value).collect();
                    let (mean_ratio, std_ratio) = mean_std(&ratios);
                    rows.push(Bench1dRow {
                        family: cfg.family.name(),
                        param,
                        kind: kind.name(),
                        order: k,
                        n,
                        route: route_label(cfg),
                        seeds: cfg.seeds,
                        mean_ratio,
                        std_ratio,
                        mean_estimate: mean_std(&est).0,
                        reference: r.value,
                        reference_route: r.route.name(),
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

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlicedRow {
    pub family: &'static str,
    pub param: f64,
    pub dim: usize,
    pub kind: &'static str,
    #[serde(rename = "K")]
    pub order: usize,
    #[serde(rename = "L")]
    pub slices: usize,
    pub n: usize,
    pub route: String,
    pub seeds: usize,
    /// Mean over seeds of `d × sliced / reference`.
    pub mean_scaled_ratio: f64,
    pub std_scaled_ratio: f64,
    pub mean_estimate: f64,
    pub reference: f64,
    pub reference_route: &'static str,
}

/// Sliced estimate in each dimension. One direction set per dimension is
/// drawn from the base seed and shared by every repetition and order.
pub fn run_bench_sliced(cfg: &ExperimentConfig) -> Result<Vec<SlicedRow>> {
    let cache = ReferenceCache::open_default()?;
    let route = cfg.route();
    let mut rows = Vec::new();
    for &d in &cfg.dims {
        let dirs = sample_directions(d, cfg.slices, derive_seed(cfg.base_seed, DIRECTION_STREAM), false)?;
        for &param in &cfg.params {
            let (mu, nu) = cfg.family.pair_nd(param, d)?;
            let refs = cfg
                .kinds
                .iter()
                .map(|&k| reference_nd_for(cfg, &cache, cfg.family, &mu, &nu, k))
                .collect::<Result<Vec<_>>>()?;
            for &n in &cfg.sizes {
                let per_seed = over_seeds(cfg, n * d > CONCURRENT_ENTRIES, |s| {
                    let a = mu.sample(n, derive_seed(s, 0))?;
                    let b = nu.sample(n, derive_seed(s, 1))?;
                    let mut out = Vec::new();
                    for &kind in &cfg.kinds {
                        for &k in &cfg.orders {
                            let spec = EntropySpec::new(kind);
                            out.push(sliced_rank_divergence(&a, &b, k, &spec, &dirs, route, derive_seed(s, 2))?.value());
                        }
                    }
                    Ok(out)
                })?;
                for (i, (&kind, r)) in cfg.kinds.iter().zip(&refs).enumerate() {
                    for (j, &k) in cfg.orders.iter().enumerate() {
                        let col = i * cfg.orders.len() + j;
                        let est: Vec<f64> = per_seed.iter().map(|v| v[col]).collect();
                        let scaled: Vec<f64> = est.iter().map(|e| d as f64 * e / r.value).collect();
                        let (mean_scaled_ratio, std_scaled_ratio) = mean_std(&scaled);
                        rows.push(SlicedRow {
                            family: cfg.family.name(),
                            param,
                            dim: d,
                            kind: kind.name(),
                            order: k,
                            slices: cfg.slices,
                            n,
                            route: route_label(cfg),
                            seeds: cfg.seeds,
                            mean_scaled_ratio,
                            std_scaled_ratio,
                            mean_estimate: mean_std(&est).0,
                            reference: r.value,
                            reference_route: r.route.name(),
                        });
                    }
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.param.total_cmp(&b.param))
            .then(a.kind.cmp(b.kind))
            .then(a.order.cmp(&b.order))
            .then(a.n.cmp(&b.n))
    });
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlVsNRow {
    pub dim: usize,
    pub n: usize,
    #[serde(rename = "K")]
    pub order: usize,
    pub route: String,
    pub seeds: usize,
    pub mean: f64,
    pub std: f64,
    pub truth: f64,
}

/// Axis-corrected KL between the truncated Gaussian and the uniform law on
/// the benchmark box of each dimension, per sample size.
pub fn run_kl_vs_n(cfg: &ExperimentConfig) -> Result<Vec<KlVsNRow>> {
    let route = cfg.route();
    let spec = EntropySpec::new(EntropyKind::Kl);
    let mut rows = Vec::new();
    for &d in &cfg.dims {
        let bounds = benchmark_box(d)?;
        let truth = kl_truncgauss_vs_uniform(&bounds)?;
        let mu = DistND::trunc_gaussian_box(bounds.clone())?;
        let nu = DistND::uniform_box(bounds)?;
        for &n in &cfg.sizes {
            let per_seed = over_seeds(cfg, n * d > CONCURRENT_ENTRIES, |s| {
                let a = mu.sample(n, derive_seed(s, 0))?;
                let b = nu.sample(n, derive_seed(s, 1))?;
                cfg.orders
                    .iter()
                    .map(|&k| Ok(axis_corrected_divergence(&a, &b, k, &spec, route, derive_seed(s, 2))?.value))
                    .collect::<Result<Vec<f64>>>()
            })?;
            for (j, &k) in cfg.orders.iter().enumerate() {
                let est: Vec<f64> = per_seed.iter().map(|v| v[j]).collect();
                let (mean, std) = mean_std(&est);
                rows.push(KlVsNRow {
                    dim: d,
                    n,
                    order: k,
                    route: route_label(cfg),
                    seeds: cfg.seeds,
                    mean,
                    std,
                    truth,
                });
            }
        }
    }
    rows.sort_by(|a, b| a.dim.cmp(&b.dim).then(a.order.cmp(&b.order)).then(a.n.cmp(&b.n)));
    Ok(rows)
}
