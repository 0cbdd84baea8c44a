//! Flat experiment configuration: per-experiment defaults, then a TOML file,
//! then `key=value` overrides, checked against the known keys.

use std::path::{Path, PathBuf};

use rankdiv::distributions::{Dist1D, DistND};
use rankdiv::transport::{CoRptConfig, Dynamics, Linear, Schedule, ToyTarget, TransportConfig};
use rankdiv::{EntropyKind, EntropySpec, Error, Result, Route};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Bench1d,
    BenchSliced,
    KlVsN,
    Rates,
    Bounds,
    Transport,
    Estimate,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Bench1d => "bench1d",
            Self::BenchSliced => "bench-sliced",
            Self::KlVsN => "kl-vs-n",
            Self::Rates => "rates",
            Self::Bounds => "bounds",
            Self::Transport => "transport",
            Self::Estimate => "estimate",
        }
    }
}

/// Benchmark pairs `(μ, ν)`, each indexed by one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `N(0, I)` against `N(Δe₁, I)`.
    MeanShift,
    /// `N(0, I)` against `N(0, σ²I)`.
    Scale,
    /// `½N(−Δe₁, I) + ½N(Δe₁, I)` against `N(0, I)`.
    Multimodal,
    /// Laplace with the given scale (product of standard Laplace in `d > 1`)
    /// against `N(0, I)`.
    Laplace,
    /// Student-t with the given degrees of freedom against `N(0, I)`.
    StudentT,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Self::MeanShift => "mean-shift",
            Self::Scale => "scale",
            Self::Multimodal => "multimodal",
            Self::Laplace => "laplace",
            Self::StudentT => "student-t",
        }
    }

    pub fn pair_1d(self, param: f64) -> Result<(Dist1D, Dist1D)> {
        let std = Dist1D::standard_normal();
        Ok(match self {
            Self::MeanShift => (std, Dist1D::gaussian(param, 1.0)?),
            Self::Scale => (std, Dist1D::gaussian(0.0, param)?),
            Self::Multimodal => (Dist1D::gauss_mix2(param, 1.0)?, std),
            Self::Laplace => (Dist1D::laplace(0.0, param)?, std),
            Self::StudentT => (Dist1D::student_t(param)?, std),
        })
    }

    pub fn pair_nd(self, param: f64, dim: usize) -> Result<(DistND, DistND)> {
        if dim == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        let origin = || DistND::iso_gaussian(vec![0.0; dim], 1.0);
        let pair = match self {
            Self::MeanShift => {
                let mut shift = vec![0.0; dim];
                shift[0] = param;
                (origin()?, DistND::iso_gaussian(shift, 1.0)?)
            }
            Self::Scale => (origin()?, DistND::iso_gaussian(vec![0.0; dim], param)?),
            Self::Multimodal => (DistND::GaussMix2ND { delta: param, dim }.validated()?, origin()?),
            Self::Laplace => {
                if param != 1.0 {
                    return Err(Error::Config(
                        "the multivariate laplace family has unit scale; set params = [1.0]".into(),
                    ));
                }
                (DistND::FactorLaplace { dim }.validated()?, origin()?)
            }
            Self::StudentT => (DistND::StudentTProduct { df: param, dim }.validated()?, origin()?),
        };
        Ok(pair)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteChoice {
    /// Bernstein weights at the empirical CDF (`τ = 0`).
    Hard,
    /// Bernstein weights at the logistic-smoothed CDF with width `tau`.
    Smoothed,
    /// Fresh reference draws per point.
    Counted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceChoice {
    /// Closed form when available, else quadrature in 1D and Monte Carlo
    /// (or the labelled Gaussian proxy for Gaussian JS) in higher dimension.
    Auto,
    ClosedForm,
    Quadrature,
    MonteCarlo,
    GaussianProxy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Rpt,
    CoRpt,
}

fn is_none<T>(v: &Option<T>) -> bool {
    v.is_none()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub family: Family,
    pub params: Vec<f64>,
    pub kinds: Vec<EntropyKind>,
    /// Grid of orders `K`.
    pub orders: Vec<usize>,
    /// Grid of sample sizes, used for both laws.
    pub sizes: Vec<usize>,
    pub dims: Vec<usize>,
    /// Number of directions `L`.
    pub slices: usize,
    /// Number of seeded repetitions `R`.
    pub seeds: usize,
    pub base_seed: u64,
    pub route: RouteChoice,
    pub tau: f64,
    pub reference: ReferenceChoice,
    pub n_ref: usize,
    pub reference_seed: u64,
    /// Quadrature panels for exact histograms; 0 picks by order.
    pub quad_points: usize,
    pub trials: usize,
    pub delta: f64,
    pub target: ToyTarget,
    pub algo: Algo,
    pub particles: usize,
    pub reference_size: usize,
    pub steps: usize,
    pub snapshots: Vec<usize>,
    pub order_start: f64,
    pub order_end: f64,
    pub tau_start: f64,
    pub tau_end: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eta: f64,
    pub inner_steps: usize,
    pub inner_lr: f64,
    #[serde(default, skip_serializing_if = "is_none")]
    pub clip: Option<f64>,
    pub monotone: bool,
    pub beta: f64,
    pub whiten: bool,
    pub generator: EntropyKind,
    /// Estimate from coordinate marginals instead of random slices.
    pub axis: bool,
    #[serde(default, skip_serializing_if = "is_none")]
    pub mu_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "is_none")]
    pub nu_path: Option<PathBuf>,
    /// Output file, or directory for transport; `-` is standard output.
    pub output: PathBuf,
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let toy = Schedule::toy_2d();
        let mut c = Self {
            experiment: kind,
            family: Family::MeanShift,
            params: vec![1.0],
            kinds: vec![EntropyKind::Kl],
            orders: vec![64],
            sizes: vec![10_000],
            dims: vec![1],
            slices: 128,
            seeds: 10,
            base_seed: 0,
            route: RouteChoice::Hard,
            tau: 0.0,
            reference: ReferenceChoice::Auto,
            n_ref: 10_000_000,
            reference_seed: 0,
            quad_points: 0,
            trials: 200,
            delta: 0.05,
            target: ToyTarget::TwoBlobs,
            algo: Algo::Rpt,
            particles: 1000,
            reference_size: 1000,
            steps: toy.total_steps,
            snapshots: vec![0, 1, 5, 10, 20, 40, 100, 200, 400],
            order_start: toy.order.start,
            order_end: toy.order.end,
            tau_start: toy.tau.start,
            tau_end: toy.tau.end,
            eps_start: toy.eps.start,
            eps_end: toy.eps.end,
            eta: toy.eta,
            inner_steps: toy.inner_steps,
            inner_lr: toy.inner_lr,
            clip: toy.clip_cap,
            monotone: toy.monotone_coupling,
            beta: 0.5,
            whiten: false,
            generator: toy.generator.kind,
            axis: false,
            mu_path: None,
            nu_path: None,
            output: PathBuf::from(format!("{}.csv", kind.name())),
        };
        match kind {
            ExperimentKind::Bench1d => {
                c.kinds = vec![EntropyKind::JensenShannon];
                c.orders = vec![512];
            }
            ExperimentKind::BenchSliced => c.dims = vec![5],
            ExperimentKind::KlVsN => {
                c.dims = vec![2, 5, 10];
                c.sizes = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512].iter().map(|m| m * 10_000).collect();
            }
            ExperimentKind::Rates => {
                c.family = Family::Scale;
                c.params = vec![2.0];
                c.orders = (3..=10).map(|p| 1 << p).collect();
            }
            ExperimentKind::Bounds => {
                c.params = vec![0.0];
                c.kinds = vec![EntropyKind::TotalVariation];
                c.orders = vec![8];
                c.sizes = vec![1000];
                c.route = RouteChoice::Counted;
            }
            ExperimentKind::Transport => {
                c.slices = 10;
                c.output = PathBuf::from("transport");
            }
            ExperimentKind::Estimate => c.output = PathBuf::from("-"),
        }
        c
    }

    /// Defaults for `kind`, overlaid with the TOML file (if any) and then the
    /// `key=value` overrides.
    pub fn resolve(kind: ExperimentKind, file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match toml::Value::try_from(Self::defaults(kind)).map_err(config_err)? {
            toml::Value::Table(t) => t,
            _ => unreachable!("a struct serialises to a table"),
        };
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)?;
            let from_file: toml::Table = toml::from_str(&text).map_err(config_err)?;
            for (k, v) in from_file {
                table.insert(k, v);
            }
        }
        for item in overrides {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{item}` is not key=value")))?;
            table.insert(k.trim().to_string(), parse_value(v.trim()));
        }
        let cfg: Self = toml::Value::Table(table).try_into().map_err(config_err)?;
        if cfg.experiment != kind {
            return Err(Error::Config(format!(
                "configuration is for `{}` but `{}` was requested",
                cfg.experiment.name(),
                kind.name()
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: &str| Err(Error::Config(why.to_string()));
        if self.params.is_empty() || self.kinds.is_empty() || self.orders.is_empty() {
            return bad("params, kinds and orders must be nonempty");
        }
        if self.sizes.is_empty() || self.dims.is_empty() {
            return bad("sizes and dims must be nonempty");
        }
        if self.seeds == 0 {
            return bad("seeds must be at least 1");
        }
        if self.slices == 0 {
            return bad("slices must be at least 1");
        }
        if self.sizes.contains(&0) || self.dims.contains(&0) {
            return bad("sizes and dims must be positive");
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return bad("tau must be finite and nonnegative");
        }
        if self.route == RouteChoice::Smoothed && self.tau == 0.0 {
            return bad("the smoothed route needs tau > 0; use route = \"hard\" for tau = 0");
        }
        match self.experiment {
            ExperimentKind::Bounds if self.trials < 2 => bad("bounds needs at least two trials"),
            ExperimentKind::Bounds if !(self.delta > 0.0 && self.delta < 1.0) => bad("delta must lie in (0, 1)"),
            ExperimentKind::KlVsN if self.kinds != [EntropyKind::Kl] => {
                bad("kl-vs-n has an analytic truth only for kinds = [\"kl\"]")
            }
            ExperimentKind::Transport => self.dynamics()?.validate(),
            _ => Ok(()),
        }
    }

    pub fn route(&self) -> Route {
        match self.route {
            RouteChoice::Hard => Route::HARD,
            RouteChoice::Smoothed => Route::Smoothed { tau: self.tau },
            RouteChoice::Counted => Route::Counted,
        }
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            order: Linear::new(self.order_start, self.order_end),
            tau: Linear::new(self.tau_start, self.tau_end),
            eps: Linear::new(self.eps_start, self.eps_end),
            eta: self.eta,
            inner_steps: self.inner_steps,
            inner_lr: self.inner_lr,
            clip_cap: self.clip,
            generator: EntropySpec::new(self.generator),
            total_steps: self.steps,
            monotone_coupling: self.monotone,
        }
    }

    pub fn dynamics(&self) -> Result<Dynamics> {
        let schedule = self.schedule();
        Ok(match self.algo {
            Algo::Rpt => Dynamics::Rpt(TransportConfig {
                slices: self.slices,
                schedule,
            }),
            Algo::CoRpt => Dynamics::CoRpt(CoRptConfig {
                schedule,
                beta: self.beta,
                whiten: self.whiten,
            }),
        })
    }

    /// Seed of repetition `r`.
    pub fn run_seed(&self, r: usize) -> u64 {
        self.base_seed.wrapping_add(r as u64)
    }
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

/// A TOML literal when `raw` parses as one, a bare string otherwise.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
