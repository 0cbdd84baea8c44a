//! Experiment runners. Each returns its rows; writing is left to the caller.

mod bench;
mod bounds;
mod estimate;
mod rates;
mod reference;
mod transport;

use rayon::prelude::*;
use rankdiv::Result;

use crate::config::{ExperimentConfig, RouteChoice};

pub use bench::{run_bench1d, run_bench_sliced, run_kl_vs_n, Bench1dRow, KlVsNRow, SlicedRow, DIRECTION_STREAM};
pub use bounds::{run_bounds, BoundsRow};
pub use estimate::{run_estimate, EstimateRow};
pub use rates::{run_rates, RateRow};
pub use reference::{reference_1d_for, reference_nd_for};
pub use transport::{run_transport_experiment, write_transport};

/// Sample mean and (n − 1) standard deviation; the deviation is 0 for a
/// single value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub(crate) fn route_label(cfg: &ExperimentConfig) -> String {
    match cfg.route {
        RouteChoice::Hard => "hard".into(),
        RouteChoice::Smoothed => format!("smoothed(tau={})", cfg.tau),
        RouteChoice::Counted => "counted".into(),
    }
}

/// Runs `f` for every repetition seed, in parallel unless `sequential`, with
/// results in seed order.
pub(crate) fn over_seeds<T, F>(cfg: &ExperimentConfig, sequential: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    if sequential {
        (0..cfg.seeds).map(|r| f(cfg.run_seed(r))).collect()
    } else {
        (0..cfg.seeds).into_par_iter().map(|r| f(cfg.run_seed(r))).collect()
    }
}
