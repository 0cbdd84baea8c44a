//! Shared inputs for the benchmarks.

use rankdiv::rng::derive_seed;
use rankdiv::{Dist1D, DistND, SampleSet, Samples1D};

/// `N(0, 1)` and `N(1, 1)` samples of size `n`.
pub fn shift_pair(n: usize, seed: u64) -> (Samples1D, Samples1D) {
    let mu = Dist1D::standard_normal().sample(n, derive_seed(seed, 0)).expect("valid law");
    let nu = Dist1D::gaussian(1.0, 1.0).expect("valid law").sample(n, derive_seed(seed, 1)).expect("valid law");
    (mu, nu)
}

/// Isotropic Gaussians in dimension `dim`, the second shifted by `e₁`.
pub fn shift_pair_nd(n: usize, dim: usize, seed: u64) -> (SampleSet, SampleSet) {
    let mut shift = vec![0.0; dim];
    shift[0] = 1.0;
    let mu = DistND::iso_gaussian(vec![0.0; dim], 1.0).expect("valid law");
    let nu = DistND::iso_gaussian(shift, 1.0).expect("valid law");
    (
        mu.sample(n, derive_seed(seed, 0)).expect("valid law"),
        nu.sample(n, derive_seed(seed, 1)).expect("valid law"),
    )
}
