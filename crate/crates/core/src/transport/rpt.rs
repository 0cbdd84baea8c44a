use rayon::prelude::*;

use super::energy::{clamp_rank, rank_prox_with, RankEnergy};
use super::{ParticleState, Schedule, StepParams, TransportConfig};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sliced::{dot, project, sample_directions, DirectionSet, SampleSet};
use crate::univariate::Samples1D;

/// One outer step of sliced rank-proximal transport. Directions for step `t`
/// are drawn from stream `t` of the state's seed.
pub fn rpt_step(
    state: &ParticleState,
    reference: &SampleSet,
    cfg: &TransportConfig,
    step: usize,
) -> Result<ParticleState> {
    let dirs = sample_directions(
        state.positions.dim(),
        cfg.slices,
        derive_seed(state.seed, step as u64),
        false,
    )?;
    rpt_step_with_directions(state, reference, &cfg.schedule, &dirs, step)
}

/// [`rpt_step`] along caller-supplied directions.
pub fn rpt_step_with_directions(
    state: &ParticleState,
    reference: &SampleSet,
    schedule: &Schedule,
    dirs: &DirectionSet,
    step: usize,
) -> Result<ParticleState> {
    let x = &state.positions;
    let dim = x.dim();
    if reference.dim() != dim || dirs.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: if reference.dim() != dim { reference.dim() } else { dirs.dim() },
        });
    }
    let params = schedule.at(step);
    let energy = RankEnergy::new(params.order, schedule.generator);
    let corrections: Vec<Vec<f64>> = (0..dirs.len())
        .into_par_iter()
        .map(|l| slice_correction(x, reference, dirs.get(l), schedule, &params, &energy))
        .collect::<Result<_>>()?;

    let n = x.len();
    let mut accum = vec![0.0; n * dim];
    for (l, delta) in corrections.iter().enumerate() {
        let s = dirs.get(l);
        for (row, d) in accum.chunks_exact_mut(dim).zip(delta) {
            row.iter_mut().zip(s).for_each(|(a, sj)| *a += d * sj);
        }
    }
    let scale = params.eps * dim as f64 / dirs.len() as f64;
    let positions: Vec<f64> = x.data().iter().zip(&accum).map(|(p, a)| p + scale * a).collect();
    state.advance(positions, reference, schedule, params)
}

/// Per-particle displacement along one direction.
fn slice_correction(
    x: &SampleSet,
    reference: &SampleSet,
    s: &[f64],
    schedule: &Schedule,
    params: &StepParams,
    energy: &RankEnergy,
) -> Result<Vec<f64>> {
    let xs: Vec<f64> = x.rows().map(|row| dot(row, s)).collect();
    let ys = project(reference, s)?;
    let u0: Vec<f64> = ys.cdf_many(&xs, params.tau).into_iter().map(clamp_rank).collect();
    let u1 = refine_ranks(energy, &u0, &xs, schedule)?;
    Ok(matched_displacement(&ys, &u1, &xs, schedule.clip_cap))
}

/// Proximal refinement, then the optional reordering so the refined ranks
/// are nondecreasing in `order_key`.
pub(super) fn refine_ranks(
    energy: &RankEnergy,
    u0: &[f64],
    order_key: &[f64],
    schedule: &Schedule,
) -> Result<Vec<f64>> {
    let mut u1 = rank_prox_with(energy, u0, schedule.eta, schedule.inner_steps, schedule.inner_lr)?.ranks;
    if schedule.monotone_coupling {
        let mut idx: Vec<usize> = (0..order_key.len()).collect();
        idx.sort_by(|&a, &b| order_key[a].total_cmp(&order_key[b]));
        let mut sorted = u1.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        for (&i, v) in idx.iter().zip(sorted) {
            u1[i] = v;
        }
    }
    Ok(u1)
}

/// `F⁻¹(U₁) − x`, clipped to `[−c, c]` when a cap is set.
pub(super) fn matched_displacement(target: &Samples1D, u1: &[f64], xs: &[f64], cap: Option<f64>) -> Vec<f64> {
    u1.iter()
        .zip(xs)
        .map(|(&u, &v)| {
            let d = target.quantile_unchecked(u) - v;
            cap.map_or(d, |c| d.clamp(-c, c))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::{gaussian_cloud, Linear, ToyTarget};
    use super::*;
    use crate::entropy::{EntropyKind, EntropySpec};

    fn quiet_schedule() -> Schedule {
        Schedule {
            order: Linear::constant(8.0),
            tau: Linear::constant(0.0),
            eps: Linear::constant(1.0),
            eta: 1e-9,
            inner_steps: 3,
            inner_lr: 1e-10,
            clip_cap: None,
            generator: EntropySpec::new(EntropyKind::Kl),
            total_steps: 1,
            monotone_coupling: true,
        }
    }

    #[test]
    fn one_dimensional_step_is_a_cdf_quantile_round_trip() {
        let x = SampleSet::new(vec![-3.0, -0.4, 0.1, 0.7, 2.5, 9.0], 1, 0).unwrap();
        let y = SampleSet::new(vec![-1.0, -0.5, 0.0, 0.2, 0.4, 1.0, 1.5, 3.0], 1, 1).unwrap();
        let dirs = DirectionSet::from_vectors(&[vec![1.0]], 0).unwrap();
        let state = ParticleState::new(x.clone(), 0);
        let next = rpt_step_with_directions(&state, &y, &quiet_schedule(), &dirs, 0).unwrap();
        let ys = y.column(0).unwrap();
        for (a, b) in next.positions.data().iter().zip(x.data()) {
            let expected = ys.quantile_unchecked(clamp_rank(ys.empirical_cdf(*b)));
            assert!((a - expected).abs() < 1e-7, "{a} vs {expected}");
        }
    }

    #[test]
    fn clipping_bounds_each_slice() {
        let x = SampleSet::new(vec![-10.0, 0.0, 10.0], 1, 0).unwrap();
        let y = SampleSet::new(vec![0.0, 0.1, 0.2], 1, 1).unwrap();
        let dirs = DirectionSet::from_vectors(&[vec![1.0]], 0).unwrap();
        let mut schedule = quiet_schedule();
        schedule.clip_cap = Some(0.3);
        let next = rpt_step_with_directions(&ParticleState::new(x.clone(), 0), &y, &schedule, &dirs, 0).unwrap();
        for (a, b) in next.positions.data().iter().zip(x.data()) {
            assert!((a - b).abs() <= 0.3 + 1e-15);
        }
    }

    #[test]
    fn self_transport_barely_moves() {
        let x = gaussian_cloud(400, 2, 3).unwrap();
        let cfg = TransportConfig::toy_2d();
        let tau = cfg.schedule.tau.start;
        let mut state = ParticleState::new(x.clone(), 11);
        for t in 0..10 {
            let reference = state.positions.clone();
            state = rpt_step(&state, &reference, &cfg, t).unwrap();
            let step = &state.trace.last().unwrap();
            assert!(step.mean_displacement < 10.0 * tau);
        }
        for j in 0..2 {
            let before = x.column(j).unwrap().mean();
            let after = state.positions.column(j).unwrap().mean();
            assert!((after - before).abs() < 10.0 * tau);
        }
    }

    #[test]
    fn steps_are_reproducible() {
        let x = gaussian_cloud(200, 2, 1).unwrap();
        let y = ToyTarget::Ring.sample(200, 2).unwrap();
        let cfg = TransportConfig::toy_2d();
        let a = rpt_step(&ParticleState::new(x.clone(), 5), &y, &cfg, 3).unwrap();
        let b = rpt_step(&ParticleState::new(x, 5), &y, &cfg, 3).unwrap();
        assert_eq!(a, b);
    }
}
