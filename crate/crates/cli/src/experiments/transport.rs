use std::path::PathBuf;

use rankdiv::rng::derive_seed;
use rankdiv::transport::{gaussian_cloud, run_transport, write_positions_csv, write_trace_csv};
use rankdiv::{ParticleState, Result};

use crate::config::ExperimentConfig;
use crate::output::header;

/// Runs the configured dynamics from a standard Gaussian cloud towards the
/// toy target. The cloud, the target sample and the dynamics use streams 0,
/// 1 and 2 of the base seed.
pub fn run_transport_experiment(cfg: &ExperimentConfig) -> Result<Vec<ParticleState>> {
    let initial = gaussian_cloud(cfg.particles, 2, derive_seed(cfg.base_seed, 0))?;
    let reference = cfg.target.sample(cfg.reference_size, derive_seed(cfg.base_seed, 1))?;
    let state = ParticleState::new(initial, derive_seed(cfg.base_seed, 2));
    run_transport(state, &reference, &cfg.dynamics()?, &cfg.snapshots)
}

/// Writes `<target>_step_<t>.csv` for every returned state and
/// `<target>_trace.csv` from the last one into the output directory.
pub fn write_transport(cfg: &ExperimentConfig, states: &[ParticleState]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.output)?;
    let head = header(cfg);
    let tag = cfg.target.name();
    let mut files = Vec::with_capacity(states.len() + 1);
    for s in states {
        let path = cfg.output.join(format!("{tag}_step_{}.csv", s.step_index));
        write_positions_csv(s, &path, Some(&head))?;
        files.push(path);
    }
    if let Some(last) = states.last() {
        let path = cfg.output.join(format!("{tag}_trace.csv"));
        write_trace_csv(&last.trace, &path, Some(&head))?;
        files.push(path);
    }
    Ok(files)
}
