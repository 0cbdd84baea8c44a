//! Two-dimensional toy targets and the Gaussian starting cloud.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{par_fill_rows, Rng};
use crate::sliced::SampleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ToyTarget {
    /// Uniform on the dark cells of a 4×4 board covering `[-2, 2]²`.
    Checkerboard,
    /// Radius 2 with Gaussian radial noise of std 0.1.
    Ring,
    /// Two interleaved arms of an Archimedean spiral.
    Spirals,
    /// `½N((−2,0), 0.25 I) + ½N((2,0), 0.25 I)`.
    TwoBlobs,
    /// Eight Gaussians of std 0.2 evenly spaced on the circle of radius 2.
    GaussianMix,
}

impl ToyTarget {
    pub const ALL: [ToyTarget; 5] = [
        ToyTarget::Checkerboard,
        ToyTarget::Ring,
        ToyTarget::Spirals,
        ToyTarget::TwoBlobs,
        ToyTarget::GaussianMix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Checkerboard => "checkerboard",
            Self::Ring => "ring",
            Self::Spirals => "spirals",
            Self::TwoBlobs => "two-blobs",
            Self::GaussianMix => "gaussian-mix",
        }
    }

    fn draw(self, r: &mut Rng, out: &mut [f64]) {
        let normal = |r: &mut Rng| -> f64 { r.sample(StandardNormal) };
        match self {
            Self::Checkerboard => {
                let (i, j) = loop {
                    let (i, j) = (r.random_range(0..4), r.random_range(0..4));
                    if (i + j) % 2 == 0 {
                        break (i, j);
                    }
                };
                out[0] = i as f64 - 2.0 + r.random::<f64>();
                out[1] = j as f64 - 2.0 + r.random::<f64>();
            }
            Self::Ring => {
                let theta = 2.0 * PI * r.random::<f64>();
                let rad = 2.0 + 0.1 * normal(r);
                out[0] = rad * theta.cos();
                out[1] = rad * theta.sin();
            }
            Self::Spirals => {
                let t = 3.0 * PI * r.random::<f64>().sqrt();
                let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
                let scale = 2.5 / (3.0 * PI);
                out[0] = sign * scale * t * t.cos() + 0.08 * normal(r);
                out[1] = sign * scale * t * t.sin() + 0.08 * normal(r);
            }
            Self::TwoBlobs => {
                let c = if r.random::<bool>() { 2.0 } else { -2.0 };
                out[0] = c + 0.5 * normal(r);
                out[1] = 0.5 * normal(r);
            }
            Self::GaussianMix => {
                let k = r.random_range(0..8) as f64;
                let theta = 2.0 * PI * k / 8.0;
                out[0] = 2.0 * theta.cos() + 0.2 * normal(r);
                out[1] = 2.0 * theta.sin() + 0.2 * normal(r);
            }
        }
    }

    /// `n` draws from the target.
    pub fn sample(self, n: usize, seed: u64) -> Result<SampleSet> {
        let mut data = vec![0.0; 2 * n];
        par_fill_rows::<Error, _>(&mut data, 2, seed, |r, block| {
            block.chunks_exact_mut(2).for_each(|row| self.draw(r, row));
            Ok(())
        })?;
        SampleSet::new(data, 2, seed)
    }
}

impl fmt::Display for ToyTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ToyTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown target `{s}`")))
    }
}

/// `n` draws from the standard Gaussian in `dim` dimensions.
pub fn gaussian_cloud(n: usize, dim: usize, seed: u64) -> Result<SampleSet> {
    let mut data = vec![0.0; n * dim];
    par_fill_rows::<Error, _>(&mut data, dim, seed, |r, block| {
        block.iter_mut().for_each(|x| *x = r.sample(StandardNormal));
        Ok(())
    })?;
    SampleSet::new(data, dim, seed)
}
