//! Multivariate samples, random directions and sliced rank divergences.

use std::io::Write;
use std::path::Path;

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{rank_divergence, DivergenceEstimate, Route};
use crate::entropy::EntropySpec;
use crate::error::{domain, Error, Result};
use crate::rng::{derive_seed, rng};
use crate::univariate::Samples1D;

/// `N × d` draws stored row-major, with the seed that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    data: Vec<f64>,
    dim: usize,
    seed: u64,
}

impl SampleSet {
    pub fn new(data: Vec<f64>, dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 || data.is_empty() || data.len() % dim != 0 {
            return Err(domain(format!(
                "{} values do not form a nonempty matrix with {dim} columns",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(domain("sample set contains non-finite values"));
        }
        Ok(Self { data, dim, seed })
    }

    pub fn from_rows(rows: &[Vec<f64>], seed: u64) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Self::new(rows.concat(), dim, seed)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn column(&self, j: usize) -> Result<Samples1D> {
        if j >= self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: j + 1,
            });
        }
        Samples1D::new(self.rows().map(|r| r[j]).collect(), self.seed)
    }

    /// Applies `x ↦ A x` to every row for a row-major `d × d` matrix `A`.
    pub fn transform(&self, matrix: &[f64]) -> Result<Self> {
        let d = self.dim;
        if matrix.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: matrix.len(),
            });
        }
        let data = self
            .rows()
            .flat_map(|x| (0..d).map(move |i| dot(&matrix[i * d..(i + 1) * d], x)))
            .collect();
        Self::new(data, d, self.seed)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `L` unit vectors in dimension `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    dirs: Vec<f64>,
    dim: usize,
    antithetic: bool,
    seed: u64,
}

impl DirectionSet {
    /// Wraps explicit directions, normalising each to unit length.
    pub fn from_vectors(vectors: &[Vec<f64>], seed: u64) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(domain("need at least one nonempty direction"));
        }
        let mut dirs = Vec::with_capacity(vectors.len() * dim);
        for v in vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            let norm = dot(v, v).sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(domain("direction must be nonzero and finite"));
            }
            dirs.extend(v.iter().map(|x| x / norm));
        }
        Ok(Self {
            dirs,
            dim,
            antithetic: false,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.dirs.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn antithetic(&self) -> bool {
        self.antithetic
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn get(&self, l: usize) -> &[f64] {
        &self.dirs[l * self.dim..(l + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.dirs.chunks_exact(self.dim)
    }
}

/// Uniform directions on the sphere as normalised standard Gaussian vectors.
/// With `antithetic`, directions come in consecutive `(s, −s)` pairs.
pub fn sample_directions(dim: usize, count: usize, seed: u64, antithetic: bool) -> Result<DirectionSet> {
    if dim == 0 || count == 0 {
        return Err(domain("need d ≥ 1 and L ≥ 1"));
    }
    if antithetic && count % 2 != 0 {
        return Err(domain("antithetic directions need an even count"));
    }
    let mut r = rng(seed);
    let fresh = if antithetic { count / 2 } else { count };
    let mut dirs = Vec::with_capacity(count * dim);
    let mut v = vec![0.0; dim];
    for _ in 0..fresh {
        let norm = loop {
            v.iter_mut().for_each(|x| *x = r.sample(StandardNormal));
            let n = dot(&v, &v).sqrt();
            if n > 1e-300 {
                break n;
            }
        };
        dirs.extend(v.iter().map(|x| x / norm));
        if antithetic {
            dirs.extend(v.iter().map(|x| -x / norm));
        }
    }
    Ok(DirectionSet {
        dirs,
        dim,
        antithetic,
        seed,
    })
}

/// The one-dimensional pushforward `x ↦ sᵀx`, in row order.
pub fn project(samples: &SampleSet, s: &[f64]) -> Result<Samples1D> {
    if s.len() != samples.dim() {
        return Err(Error::DimensionMismatch {
            expected: samples.dim(),
            got: s.len(),
        });
    }
    Samples1D::new(samples.rows().map(|x| dot(x, s)).collect(), samples.seed())
}

/// A sliced estimate with its per-direction values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicedEstimate {
    /// Average over directions; counts and seeds describe the whole run.
    pub estimate: DivergenceEstimate,
    pub per_slice: Vec<f64>,
    pub dim: usize,
}

impl SlicedEstimate {
    pub fn value(&self) -> f64 {
        self.estimate.value
    }

    /// Standard error of the direction average.
    pub fn std_error(&self) -> f64 {
        let l = self.per_slice.len();
        if l < 2 {
            return 0.0;
        }
        let m = self.value();
        let var = self.per_slice.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (l - 1) as f64;
        (var / l as f64).sqrt()
    }

    /// The sliced value multiplied by the dimension. This is only a rough
    /// calibration for comparing against a full-dimensional divergence.
    pub fn dimension_scaled(&self) -> f64 {
        self.dim as f64 * self.value()
    }

    /// Writes `direction_index,slice_value` rows.
    pub fn write_slice_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "direction_index,slice_value")?;
        for (l, v) in self.per_slice.iter().enumerate() {
            writeln!(w, "{l},{v}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Average over `dirs` of the univariate rank divergence between the
/// projected samples. Slice `l` of the counted route uses stream `l` of `seed`.
pub fn sliced_rank_divergence(
    mu: &SampleSet,
    nu: &SampleSet,
    order: usize,
    spec: &EntropySpec,
    dirs: &DirectionSet,
    route: Route,
    seed: u64,
) -> Result<SlicedEstimate> {
    if mu.dim() != nu.dim() || mu.dim() != dirs.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            got: if nu.dim() != mu.dim() { nu.dim() } else { dirs.dim() },
        });
    }
    let per_slice: Vec<f64> = (0..dirs.len())
        .into_par_iter()
        .map(|l| {
            let s = dirs.get(l);
            let pm = project(mu, s)?;
            let pn = project(nu, s)?;
            rank_divergence(&pm, &pn, order, spec, route, derive_seed(seed, l as u64))
                .map(|e| e.value)
        })
        .collect::<Result<_>>()?;
    let mean = per_slice.iter().sum::<f64>() / per_slice.len() as f64;
    Ok(SlicedEstimate {
        estimate: DivergenceEstimate {
            value: mean,
            order,
            entropy: spec.kind,
            provenance: route.provenance(),
            tau: match route {
                Route::Smoothed { tau } => Some(tau),
                Route::Counted => None,
            },
            n_mu: mu.len(),
            n_nu: nu.len(),
            seed,
        },
        per_slice,
        dim: mu.dim(),
    })
}

/// Sum over coordinates of the univariate rank divergence between the
/// coordinate marginals. It targets the full divergence only when both laws
/// factorise over coordinates; that is the caller's responsibility.
pub fn axis_corrected_divergence(
    mu: &SampleSet,
    nu: &SampleSet,
    order: usize,
    spec: &EntropySpec,
    route: Route,
    seed: u64,
) -> Result<DivergenceEstimate> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            got: nu.dim(),
        });
    }
    let per_axis: Vec<f64> = (0..mu.dim())
        .into_par_iter()
        .map(|j| {
            let stream = if mu.dim() == 1 { seed } else { derive_seed(seed, j as u64) };
            rank_divergence(&mu.column(j)?, &nu.column(j)?, order, spec, route, stream)
                .map(|e| e.value)
        })
        .collect::<Result<_>>()?;
    Ok(DivergenceEstimate {
        value: per_axis.iter().sum(),
        order,
        entropy: spec.kind,
        provenance: route.provenance(),
        tau: match route {
            Route::Smoothed { tau } => Some(tau),
            Route::Counted => None,
        },
        n_mu: mu.len(),
        n_nu: nu.len(),
        seed,
    })
}
