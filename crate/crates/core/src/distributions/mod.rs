//! Benchmark distributions, density ratios and reference divergences.

mod cache;
mod dist1d;
mod distnd;
mod ratio;
mod references;

pub use cache::{CachedReference, ReferenceCache, CACHE_ENV};
pub use dist1d::{std_normal_cdf, std_normal_pdf, Dist1D};
pub use distnd::{benchmark_box, gaussian_mass, DistND, MAX_REJECTIONS, MIN_ACCEPTANCE};
pub use ratio::{quantile_density_ratio, QuantileDensityRatio, RATIO_WINDOW};
pub use references::{
    continuous_divergence, gaussian_closed_form, hellinger2_gaussian, js_gaussian_proxy,
    js_reference_quadrature, kl_gaussian, kl_truncgauss_vs_uniform, mc_reference, reference_1d,
    tv_gaussian_shift, LogDensity, McReference, Reference, ReferenceRoute,
};
