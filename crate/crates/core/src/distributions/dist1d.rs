use std::f64::consts::{LN_2, PI, SQRT_2};

use rand::Rng as _;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::ln_gamma;

use crate::entropy::log_add_exp;
use crate::error::{domain, Error, Result};
use crate::rng::par_fill_rows;
use crate::univariate::Samples1D;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Univariate benchmark laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Dist1D {
    Gaussian { mean: f64, std: f64 },
    Laplace { loc: f64, scale: f64 },
    /// Standard Student-t with `df` degrees of freedom.
    StudentT { df: f64 },
    UniformInterval { a: f64, b: f64 },
    /// Equal mixture `½N(−δ, s²) + ½N(δ, s²)`.
    GaussMix2 { delta: f64, std: f64 },
}

impl Dist1D {
    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        Self::Gaussian { mean, std }.validated()
    }

    pub fn standard_normal() -> Self {
        Self::Gaussian {
            mean: 0.0,
            std: 1.0,
        }
    }

    pub fn laplace(loc: f64, scale: f64) -> Result<Self> {
        Self::Laplace { loc, scale }.validated()
    }

    pub fn student_t(df: f64) -> Result<Self> {
        Self::StudentT { df }.validated()
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::UniformInterval { a, b }.validated()
    }

    pub fn gauss_mix2(delta: f64, std: f64) -> Result<Self> {
        Self::GaussMix2 { delta, std }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Self::Gaussian { mean, std } => mean.is_finite() && std.is_finite() && std > 0.0,
            Self::Laplace { loc, scale } => loc.is_finite() && scale.is_finite() && scale > 0.0,
            Self::StudentT { df } => df.is_finite() && df > 0.0,
            Self::UniformInterval { a, b } => a.is_finite() && b.is_finite() && a < b,
            Self::GaussMix2 { delta, std } => delta.is_finite() && std.is_finite() && std > 0.0,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::Config(format!("invalid parameters for {self:?}")))
        }
    }

    /// Canonical short name, used as a cache key fragment.
    pub fn label(&self) -> String {
        match *self {
            Self::Gaussian { mean, std } => format!("gaussian({mean},{std})"),
            Self::Laplace { loc, scale } => format!("laplace({loc},{scale})"),
            Self::StudentT { df } => format!("student_t({df})"),
            Self::UniformInterval { a, b } => format!("uniform({a},{b})"),
            Self::GaussMix2 { delta, std } => format!("gauss_mix2({delta},{std})"),
        }
    }

    /// Closed support interval (infinite ends for unbounded laws).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::UniformInterval { a, b } => (a, b),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mean, std } => {
                let z = (x - mean) / std;
                -0.5 * z * z - LN_SQRT_2PI - std.ln()
            }
            Self::Laplace { loc, scale } => -(x - loc).abs() / scale - (2.0 * scale).ln(),
            Self::StudentT { df } => {
                ln_gamma(0.5 * (df + 1.0))
                    - ln_gamma(0.5 * df)
                    - 0.5 * (df * PI).ln()
                    - 0.5 * (df + 1.0) * (x * x / df).ln_1p()
            }
            Self::UniformInterval { a, b } => {
                if (a..=b).contains(&x) {
                    -(b - a).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Self::GaussMix2 { delta, std } => {
                let zl = (x + delta) / std;
                let zr = (x - delta) / std;
                log_add_exp(-0.5 * zl * zl, -0.5 * zr * zr) - LN_2 - LN_SQRT_2PI - std.ln()
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mean, std } => std_normal_cdf((x - mean) / std),
            Self::Laplace { loc, scale } => {
                let z = (x - loc) / scale;
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
            Self::StudentT { df } => {
                if x > 0.0 {
                    1.0 - student(df).cdf(-x)
                } else {
                    student(df).cdf(x)
                }
            }
            Self::UniformInterval { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Self::GaussMix2 { delta, std } => {
                0.5 * (std_normal_cdf((x + delta) / std) + std_normal_cdf((x - delta) / std))
            }
        }
    }

    /// Survival function `1 − F(x)`, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mean, std } => std_normal_cdf(-(x - mean) / std),
            Self::Laplace { loc, scale } => Self::Laplace {
                loc: -loc,
                scale,
            }
            .cdf(-x),
            Self::StudentT { .. } => self.cdf(-x),
            Self::UniformInterval { a, b } => ((b - x) / (b - a)).clamp(0.0, 1.0),
            Self::GaussMix2 { delta, std } => {
                0.5 * (std_normal_cdf(-(x + delta) / std) + std_normal_cdf(-(x - delta) / std))
            }
        }
    }

    /// Quantile function; `u` is clamped to `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u > 0.5 {
            return self.isf(1.0 - u);
        }
        match *self {
            Self::Gaussian { mean, std } => mean - std * SQRT_2 * erfc_inv(2.0 * u),
            Self::Laplace { loc, scale } => loc + scale * (2.0 * u).ln(),
            Self::UniformInterval { a, b } => a + u * (b - a),
            Self::StudentT { .. } | Self::GaussMix2 { .. } => self.bisect(u, false),
        }
    }

    /// Inverse survival function: the `x` with `sf(x) = p`.
    pub fn isf(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        if p > 0.5 {
            return self.quantile(1.0 - p);
        }
        match *self {
            Self::Gaussian { mean, std } => mean + std * SQRT_2 * erfc_inv(2.0 * p),
            Self::Laplace { loc, scale } => loc - scale * (2.0 * p).ln(),
            Self::UniformInterval { a, b } => b - p * (b - a),
            Self::StudentT { .. } | Self::GaussMix2 { .. } => self.bisect(p, true),
        }
    }

    /// Solves `cdf(x) = level` (or `sf(x) = level` for the upper tail) by
    /// bisection to 1e−12 relative width.
    fn bisect(&self, level: f64, upper: bool) -> f64 {
        if level <= 0.0 {
            return if upper { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        let below = |x: f64| {
            if upper {
                self.sf(x) > level
            } else {
                self.cdf(x) < level
            }
        };
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        while !below(lo) {
            lo *= 2.0;
        }
        while below(hi) {
            hi *= 2.0;
        }
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * mid.abs().max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Gaussian { mean, .. } => mean,
            Self::Laplace { loc, .. } => loc,
            Self::StudentT { df } => {
                if df > 1.0 {
                    0.0
                } else {
                    f64::NAN
                }
            }
            Self::UniformInterval { a, b } => 0.5 * (a + b),
            Self::GaussMix2 { .. } => 0.0,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::Gaussian { std, .. } => std * std,
            Self::Laplace { scale, .. } => 2.0 * scale * scale,
            Self::StudentT { df } => {
                if df > 2.0 {
                    df / (df - 2.0)
                } else {
                    f64::INFINITY
                }
            }
            Self::UniformInterval { a, b } => (b - a) * (b - a) / 12.0,
            Self::GaussMix2 { delta, std } => std * std + delta * delta,
        }
    }

    /// One draw.
    pub fn draw(&self, rng: &mut crate::rng::Rng) -> f64 {
        match *self {
            Self::Gaussian { mean, std } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + std * z
            }
            Self::Laplace { loc, scale } => {
                let e: f64 = rng.sample(Exp1);
                if rng.random::<bool>() {
                    loc + scale * e
                } else {
                    loc - scale * e
                }
            }
            Self::StudentT { df } => StudentT::new(df).expect("validated df").sample(rng),
            Self::UniformInterval { a, b } => a + (b - a) * rng.random::<f64>(),
            Self::GaussMix2 { delta, std } => {
                let z: f64 = rng.sample(StandardNormal);
                let centre = if rng.random::<bool>() { delta } else { -delta };
                centre + std * z
            }
        }
    }

    /// `n` i.i.d. draws, reproducible from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Samples1D> {
        if n == 0 {
            return Err(domain("sample size must be at least 1"));
        }
        self.validated()?;
        let mut values = vec![0.0; n];
        par_fill_rows::<Error, _>(&mut values, 1, seed, |rng, block| {
            block.iter_mut().for_each(|x| *x = self.draw(rng));
            Ok(())
        })?;
        Samples1D::new(values, seed)
    }
}

fn student(df: f64) -> StudentsT {
    StudentsT::new(0.0, 1.0, df).expect("validated df")
}

/// `Φ(z)` via `erfc`, accurate in the lower tail.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI).exp()
}
