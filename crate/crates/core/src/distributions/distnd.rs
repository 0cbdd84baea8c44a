use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::dist1d::{std_normal_cdf, Dist1D};
use crate::entropy::log_add_exp;
use crate::error::{domain, Error, Result};
use crate::rng::par_fill_rows;
use crate::sliced::SampleSet;

/// Most rejections tolerated while drawing one coordinate of a truncated Gaussian.
pub const MAX_REJECTIONS: usize = 10_000;

/// Coordinates whose truncation window holds less Gaussian mass than this are
/// rejected as degenerate.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

/// Multivariate benchmark laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistND {
    IsoGaussian { mean: Vec<f64>, std: f64 },
    DiagGaussian { mean: Vec<f64>, std: Vec<f64> },
    /// Standard Gaussian restricted to an axis-aligned box and renormalised.
    TruncGaussianBox { bounds: Vec<(f64, f64)> },
    UniformBox { bounds: Vec<(f64, f64)> },
    /// Product of standard Laplace coordinates.
    FactorLaplace { dim: usize },
    /// Product of standard Student-t coordinates.
    StudentTProduct { df: f64, dim: usize },
    /// `½N(−δe₁, I) + ½N(δe₁, I)`.
    GaussMix2ND { delta: f64, dim: usize },
}

impl DistND {
    pub fn dim(&self) -> usize {
        match self {
            Self::IsoGaussian { mean, .. } | Self::DiagGaussian { mean, .. } => mean.len(),
            Self::TruncGaussianBox { bounds } | Self::UniformBox { bounds } => bounds.len(),
            Self::FactorLaplace { dim }
            | Self::StudentTProduct { dim, .. }
            | Self::GaussMix2ND { dim, .. } => *dim,
        }
    }

    pub fn validated(self) -> Result<Self> {
        let bad = |why: &str| Err(Error::Config(format!("{why}: {self:?}")));
        if self.dim() == 0 {
            return bad("dimension must be at least 1");
        }
        match &self {
            Self::IsoGaussian { mean, std } => {
                if !(*std > 0.0 && std.is_finite()) || mean.iter().any(|m| !m.is_finite()) {
                    return bad("invalid Gaussian parameters");
                }
            }
            Self::DiagGaussian { mean, std } => {
                if mean.len() != std.len()
                    || std.iter().any(|s| !(*s > 0.0 && s.is_finite()))
                    || mean.iter().any(|m| !m.is_finite())
                {
                    return bad("invalid Gaussian parameters");
                }
            }
            Self::TruncGaussianBox { bounds } | Self::UniformBox { bounds } => {
                if bounds
                    .iter()
                    .any(|&(a, b)| !(a.is_finite() && b.is_finite() && a < b))
                {
                    return bad("box intervals must be finite and nonempty");
                }
                if matches!(self, Self::TruncGaussianBox { .. }) {
                    for &(a, b) in bounds {
                        if gaussian_mass(a, b) < MIN_ACCEPTANCE {
                            return bad("truncation window has negligible acceptance");
                        }
                    }
                }
            }
            Self::FactorLaplace { .. } => {}
            Self::StudentTProduct { df, .. } => {
                if !(*df > 0.0 && df.is_finite()) {
                    return bad("degrees of freedom must be positive");
                }
            }
            Self::GaussMix2ND { delta, .. } => {
                if !delta.is_finite() {
                    return bad("separation must be finite");
                }
            }
        }
        Ok(self)
    }

    pub fn iso_gaussian(mean: Vec<f64>, std: f64) -> Result<Self> {
        Self::IsoGaussian { mean, std }.validated()
    }

    pub fn trunc_gaussian_box(bounds: Vec<(f64, f64)>) -> Result<Self> {
        Self::TruncGaussianBox { bounds }.validated()
    }

    pub fn uniform_box(bounds: Vec<(f64, f64)>) -> Result<Self> {
        Self::UniformBox { bounds }.validated()
    }

    pub fn label(&self) -> String {
        serde_json::to_string(self).expect("serialisable")
    }

    /// The coordinate laws when the distribution is a product of
    /// univariate families, `None` otherwise.
    pub fn marginals(&self) -> Option<Vec<Dist1D>> {
        match self {
            Self::IsoGaussian { mean, std } => Some(
                mean.iter()
                    .map(|&m| Dist1D::Gaussian { mean: m, std: *std })
                    .collect(),
            ),
            Self::DiagGaussian { mean, std } => Some(
                mean.iter()
                    .zip(std)
                    .map(|(&m, &s)| Dist1D::Gaussian { mean: m, std: s })
                    .collect(),
            ),
            Self::UniformBox { bounds } => Some(
                bounds
                    .iter()
                    .map(|&(a, b)| Dist1D::UniformInterval { a, b })
                    .collect(),
            ),
            Self::FactorLaplace { dim } => Some(vec![
                Dist1D::Laplace {
                    loc: 0.0,
                    scale: 1.0
                };
                *dim
            ]),
            Self::StudentTProduct { df, dim } => Some(vec![Dist1D::StudentT { df: *df }; *dim]),
            Self::TruncGaussianBox { .. } | Self::GaussMix2ND { .. } => None,
        }
    }

    pub fn ln_pdf(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            Self::TruncGaussianBox { bounds } => {
                let mut acc = 0.0;
                for (&xi, &(a, b)) in x.iter().zip(bounds) {
                    if !(a..=b).contains(&xi) {
                        return f64::NEG_INFINITY;
                    }
                    acc += Dist1D::standard_normal().ln_pdf(xi) - gaussian_mass(a, b).ln();
                }
                acc
            }
            Self::GaussMix2ND { delta, .. } => {
                let std = Dist1D::standard_normal();
                let rest: f64 = x[1..].iter().map(|&v| std.ln_pdf(v)).sum();
                let l = std.ln_pdf(x[0] + delta);
                let r = std.ln_pdf(x[0] - delta);
                log_add_exp(l, r) - std::f64::consts::LN_2 + rest
            }
            _ => {
                let m = self.marginals().expect("product family");
                x.iter().zip(&m).map(|(&v, d)| d.ln_pdf(v)).sum()
            }
        }
    }

    fn draw_row(&self, rng: &mut crate::rng::Rng, row: &mut [f64]) -> Result<()> {
        match self {
            Self::TruncGaussianBox { bounds } => {
                for (slot, &(a, b)) in row.iter_mut().zip(bounds) {
                    *slot = truncated_standard_normal(rng, a, b)?;
                }
            }
            Self::GaussMix2ND { delta, .. } => {
                for slot in row.iter_mut() {
                    *slot = rng.sample(StandardNormal);
                }
                row[0] += if rng.random::<bool>() { *delta } else { -delta };
            }
            _ => {
                let m = self.marginals().expect("product family");
                for (slot, d) in row.iter_mut().zip(&m) {
                    *slot = d.draw(rng);
                }
            }
        }
        Ok(())
    }

    /// `n` i.i.d. draws as an `n × d` sample set, reproducible from `seed`.
    ///
    /// The truncated Gaussian factorises over coordinates, so each coordinate
    /// is drawn by its own accept–reject loop; the joint law is the same as
    /// rejecting whole vectors, at a fraction of the cost for small boxes.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleSet> {
        if n == 0 {
            return Err(domain("sample size must be at least 1"));
        }
        let this = self.clone().validated()?;
        let d = this.dim();
        let mut data = vec![0.0; n * d];
        par_fill_rows(&mut data, d, seed, |rng, block| {
            block
                .chunks_exact_mut(d)
                .try_for_each(|row| this.draw_row(rng, row))
        })?;
        SampleSet::new(data, d, seed)
    }
}

/// `Φ(b) − Φ(a)`, evaluated on the side of zero that avoids cancellation.
pub fn gaussian_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        std_normal_cdf(-a) - std_normal_cdf(-b)
    } else {
        std_normal_cdf(b) - std_normal_cdf(a)
    }
}

fn truncated_standard_normal(rng: &mut crate::rng::Rng, a: f64, b: f64) -> Result<f64> {
    for _ in 0..=MAX_REJECTIONS {
        let z: f64 = rng.sample(StandardNormal);
        if (a..=b).contains(&z) {
            return Ok(z);
        }
    }
    Err(Error::Evaluation(format!(
        "truncated Gaussian on [{a}, {b}] exceeded {MAX_REJECTIONS} rejections"
    )))
}

/// The boxes of the KL-versus-sample-size benchmark, by dimension 2, 5 or 10.
pub fn benchmark_box(dim: usize) -> Result<Vec<(f64, f64)>> {
    let x2 = [(0.1, 2.0), (-1.0, 0.0)];
    let x5 = [(0.1, 2.0), (-1.0, 0.0), (2.0, 3.0), (-2.0, -1.5), (-1.0, 1.0)];
    match dim {
        2 => Ok(x2.to_vec()),
        5 => Ok(x5.to_vec()),
        10 => Ok(x5.iter().chain(x5.iter()).copied().collect()),
        _ => Err(Error::Config(format!(
            "no benchmark box in dimension {dim}; supported: 2, 5, 10"
        ))),
    }
}
