use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::energy::{clamp_rank, RankEnergy};
use super::rpt::refine_ranks;
use super::{CoRptConfig, ParticleState};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng, Rng};
use crate::sliced::{dot, SampleSet};
use crate::univariate::Samples1D;

/// Ridge added to the reference covariance before whitening, relative to
/// its mean diagonal.
const RIDGE: f64 = 1e-3;

/// Points closer than this to the centre get a random direction.
const CENTRE_JITTER: f64 = 1e-9;

/// Symmetric whitening `W = C^{-1/2}` and its inverse.
struct Zca {
    forward: Vec<f64>,
    inverse: Vec<f64>,
}

impl Zca {
    fn fit(centred: &[f64], dim: usize) -> Result<Self> {
        let m = centred.len() / dim;
        let mut cov = DMatrix::<f64>::zeros(dim, dim);
        for row in centred.chunks_exact(dim) {
            for i in 0..dim {
                for j in 0..=i {
                    cov[(i, j)] += row[i] * row[j];
                }
            }
        }
        for i in 0..dim {
            for j in 0..i {
                cov[(j, i)] = cov[(i, j)];
            }
        }
        cov /= m as f64;
        let ridge = RIDGE * cov.diagonal().mean();
        for i in 0..dim {
            cov[(i, i)] += ridge;
        }
        let eig = SymmetricEigen::new(cov);
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::Evaluation(
                "reference covariance is singular; whitening is undefined".into(),
            ));
        }
        let build = |g: &dyn Fn(f64) -> f64| {
            let d = DMatrix::from_diagonal(&eig.eigenvalues.map(g));
            let a = &eig.eigenvectors * d * eig.eigenvectors.transpose();
            // row-major for `apply`
            a.transpose().as_slice().to_vec()
        };
        Ok(Self {
            forward: build(&|l| 1.0 / l.sqrt()),
            inverse: build(&|l| l.sqrt()),
        })
    }
}

fn apply(matrix: &[f64], data: &mut [f64], dim: usize) {
    let mut tmp = vec![0.0; dim];
    for row in data.chunks_exact_mut(dim) {
        for (i, t) in tmp.iter_mut().enumerate() {
            *t = dot(&matrix[i * dim..(i + 1) * dim], row);
        }
        row.copy_from_slice(&tmp);
    }
}

/// Splits rows into radii and unit directions. Rows at the centre receive a
/// uniformly random direction.
fn polar(data: &[f64], dim: usize, r: &mut Rng) -> (Vec<f64>, Vec<f64>) {
    let mut radii = Vec::with_capacity(data.len() / dim);
    let mut dirs = Vec::with_capacity(data.len());
    for row in data.chunks_exact(dim) {
        let rad = dot(row, row).sqrt();
        radii.push(rad);
        if rad > CENTRE_JITTER {
            dirs.extend(row.iter().map(|x| x / rad));
        } else {
            let v: Vec<f64> = loop {
                let v: Vec<f64> = (0..dim).map(|_| r.sample(StandardNormal)).collect();
                if dot(&v, &v) > 1e-300 {
                    break v;
                }
            };
            let n = dot(&v, &v).sqrt();
            dirs.extend(v.iter().map(|x| x / n));
        }
    }
    (radii, dirs)
}

/// Index of the reference direction with the largest cosine; the lowest
/// index wins ties.
fn nearest_direction(u: &[f64], reference: &[f64], dim: usize) -> usize {
    let mut best = 0;
    let mut best_cos = f64::NEG_INFINITY;
    for (j, v) in reference.chunks_exact(dim).enumerate() {
        let c = dot(u, v);
        if c > best_cos {
            best_cos = c;
            best = j;
        }
    }
    best
}

/// One center-outward update. Randomness (direction jitter at the centre)
/// comes from stream `step` of the state's seed.
pub fn co_rpt_step(
    state: &ParticleState,
    reference: &SampleSet,
    cfg: &CoRptConfig,
    step: usize,
) -> Result<ParticleState> {
    let x = &state.positions;
    let dim = x.dim();
    if reference.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: reference.dim(),
        });
    }
    let schedule = &cfg.schedule;
    let params = schedule.at(step);
    let m = reference.len();
    let centre: Vec<f64> = (0..dim)
        .map(|j| reference.rows().map(|y| y[j]).sum::<f64>() / m as f64)
        .collect();
    let recentre = |data: &[f64]| -> Vec<f64> {
        data.chunks_exact(dim)
            .flat_map(|row| row.iter().zip(&centre).map(|(a, c)| a - c))
            .collect()
    };
    let mut xt = recentre(x.data());
    let mut yt = recentre(reference.data());
    let zca = if cfg.whiten {
        let z = Zca::fit(&yt, dim)?;
        apply(&z.forward, &mut xt, dim);
        apply(&z.forward, &mut yt, dim);
        Some(z)
    } else {
        None
    };

    let mut r = rng(derive_seed(state.seed, step as u64));
    let (rx, ux) = polar(&xt, dim, &mut r);
    let (ry, uy) = polar(&yt, dim, &mut r);
    let target_radii = Samples1D::new(ry, reference.seed())?;

    let energy = RankEnergy::new(params.order, schedule.generator);
    let u0: Vec<f64> = target_radii.cdf_many(&rx, params.tau).into_iter().map(clamp_rank).collect();
    let u1 = refine_ranks(&energy, &u0, &rx, schedule)?;

    let beta = cfg.beta;
    let steps: Vec<f64> = (0..x.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let u = &ux[i * dim..(i + 1) * dim];
            let j = nearest_direction(u, &uy, dim);
            let v = &uy[j * dim..(j + 1) * dim];
            let mut blend: Vec<f64> = u.iter().zip(v).map(|(a, b)| (1.0 - beta) * a + beta * b).collect();
            let norm = dot(&blend, &blend).sqrt();
            if norm > 0.0 {
                blend.iter_mut().for_each(|b| *b /= norm);
            } else {
                blend.copy_from_slice(v);
            }
            let r_star = target_radii.quantile_unchecked(u1[i]);
            let old = &xt[i * dim..(i + 1) * dim];
            let mut delta: Vec<f64> = blend.iter().zip(old).map(|(b, o)| r_star * b - o).collect();
            if let Some(c) = schedule.clip_cap {
                let len = dot(&delta, &delta).sqrt();
                if len > c {
                    delta.iter_mut().for_each(|d| *d *= c / len);
                }
            }
            delta.into_iter().map(|d| params.eps * d)
        })
        .collect();

    for (a, s) in xt.iter_mut().zip(&steps) {
        *a += s;
    }
    if let Some(z) = &zca {
        apply(&z.inverse, &mut xt, dim);
    }
    for row in xt.chunks_exact_mut(dim) {
        row.iter_mut().zip(&centre).for_each(|(a, c)| *a += c);
    }
    state.advance(xt, reference, schedule, params)
}

#[cfg(test)]
mod tests {
    use super::super::{gaussian_cloud, Linear, Schedule};
    use super::*;
    use crate::entropy::{EntropyKind, EntropySpec};

    fn config(beta: f64, clip: Option<f64>) -> CoRptConfig {
        CoRptConfig {
            schedule: Schedule {
                order: Linear::constant(32.0),
                tau: Linear::constant(0.05),
                eps: Linear::constant(1.0),
                eta: 0.5,
                inner_steps: 5,
                inner_lr: 0.05,
                clip_cap: clip,
                generator: EntropySpec::new(EntropyKind::Kl),
                total_steps: 10,
                monotone_coupling: true,
            },
            beta,
            whiten: false,
        }
    }

    #[test]
    fn whitening_round_trips() {
        let y = gaussian_cloud(500, 3, 1).unwrap();
        let mut data = y.data().to_vec();
        let z = Zca::fit(&data, 3).unwrap();
        apply(&z.forward, &mut data, 3);
        apply(&z.inverse, &mut data, 3);
        for (a, b) in data.iter().zip(y.data()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn whitened_reference_is_nearly_isotropic() {
        let y = gaussian_cloud(4000, 2, 2).unwrap().transform(&[3.0, 0.0, 1.0, 0.5]).unwrap();
        let mut data = y.data().to_vec();
        let z = Zca::fit(&data, 2).unwrap();
        apply(&z.forward, &mut data, 2);
        let w = SampleSet::new(data, 2, 0).unwrap();
        // the ridge shrinks the small axis (variance about 0.2) by about 2.5%
        for j in 0..2 {
            assert!((w.column(j).unwrap().variance() - 1.0).abs() < 0.03);
        }
    }

    #[test]
    fn degenerate_reference_cannot_be_whitened() {
        assert!(Zca::fit(&[0.0; 8], 2).is_err());
    }

    #[test]
    fn ties_go_to_the_lowest_index() {
        let reference = [0.0, 1.0, 1.0, 0.0, 1.0, 0.0];
        assert_eq!(nearest_direction(&[1.0, 0.0], &reference, 2), 1);
        assert_eq!(nearest_direction(&[0.6, 0.8], &reference, 2), 0);
    }

    #[test]
    fn full_blend_adopts_the_matched_direction() {
        // recentred reference directions are ±e₁
        let y = SampleSet::new(vec![1.0, 0.0, 3.0, 0.0], 2, 0).unwrap();
        let x = SampleSet::new(vec![0.0, 1.0, 5.0, 5.0, -1.0, 0.5], 2, 1).unwrap();
        let next = co_rpt_step(&ParticleState::new(x.clone(), 0), &y, &config(1.0, None), 0).unwrap();
        for (p, q) in next.positions.rows().zip(x.rows()) {
            assert!(p[1].abs() < 1e-12, "{p:?}");
            // the matched direction is the one on q's side of the centre (2, 0)
            assert_eq!(p[0] > 2.0, q[0] >= 2.0, "{p:?} from {q:?}");
        }
    }

    #[test]
    fn clip_cap_bounds_every_increment() {
        let x = gaussian_cloud(300, 3, 1).unwrap().transform(&[4.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 4.0]).unwrap();
        let y = gaussian_cloud(300, 3, 2).unwrap();
        let next = co_rpt_step(&ParticleState::new(x.clone(), 0), &y, &config(0.5, Some(0.3)), 0).unwrap();
        let mut largest: f64 = 0.0;
        for (a, b) in next.positions.rows().zip(x.rows()) {
            let d: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            largest = largest.max(d);
        }
        assert!(largest <= 0.3 + 1e-12, "{largest}");
        assert!(largest > 0.29);
    }

    #[test]
    fn matched_radial_law_is_nearly_fixed() {
        let y = gaussian_cloud(2000, 3, 5).unwrap();
        let x = gaussian_cloud(2000, 3, 6).unwrap();
        let cfg = config(0.0, None);
        let next = co_rpt_step(&ParticleState::new(x, 0), &y, &cfg, 0).unwrap();
        let moved = next.trace.last().unwrap().mean_displacement;
        assert!(moved < 10.0 * cfg.schedule.tau.start, "{moved}");
    }

    #[test]
    fn centre_points_get_a_direction() {
        let y = gaussian_cloud(100, 2, 5).unwrap();
        let mean: Vec<f64> = (0..2).map(|j| y.column(j).unwrap().mean()).collect();
        let x = SampleSet::new(mean, 2, 0).unwrap();
        let next = co_rpt_step(&ParticleState::new(x, 4), &y, &config(0.0, None), 0).unwrap();
        assert!(next.positions.data().iter().all(|v| v.is_finite()));
    }
}
