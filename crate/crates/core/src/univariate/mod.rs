//! One-dimensional machinery: samples with their empirical CDF and quantile,
//! the Bernstein basis, and the three routes to a rank histogram.

mod bernstein;
mod histogram;
mod samples;

pub use bernstein::{bernstein_basis, bernstein_basis_derivative, BernsteinBasis};
pub use histogram::{
    bernstein_pmf, rank_count, rank_pmf_counted, rank_pmf_exact, rank_pmf_exact_with_mass,
    rank_pmf_smoothed, Provenance, RankHistogram, MASS_TOLERANCE,
};
pub use samples::{logistic, Samples1D};
