//! Rank-statistic f-divergences.
//!
//! For laws `μ` and `ν` on the line, the rank of a `μ` draw among `K`
//! independent `ν` draws has a pmf `Q` on `{0, …, K}` that is uniform exactly
//! when `μ = ν`. The discrete f-divergence of `Q` from the uniform pmf is a
//! lower bound on `D_f(μ‖ν)` that increases to it as `K` grows. This crate
//! estimates that quantity from samples, slices it over random projections in
//! higher dimensions, and uses it to drive particle transport.

// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod divergence;
pub mod entropy;
pub mod error;
pub mod quadrature;
pub mod rng;
pub mod sliced;
pub mod transport;
pub mod univariate;

pub use distributions::{Dist1D, DistND, QuantileDensityRatio};
pub use divergence::{DivergenceEstimate, Route, TheoryBounds};
pub use entropy::{EntropyKind, EntropySpec};
pub use error::{Error, Result};
pub use sliced::{DirectionSet, SampleSet};
pub use transport::{CoRptConfig, ParticleState, TransportConfig};
pub use univariate::{BernsteinBasis, Provenance, RankHistogram, Samples1D};
