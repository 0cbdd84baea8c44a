//! Particle transport driven by the rank energy.
//!
//! Both dynamics share one inner move: compute soft ranks of the particles
//! against a univariate reference, take a few proximal gradient steps on
//! `E(U) + ‖U − U₀‖²/(2η)`, and map the refined ranks back through the
//! reference quantile function. [`rpt_step`] does this along random
//! projections and averages the corrections; [`co_rpt_step`] does it once on
//! radii about the target mean and moves directions by nearest-neighbour
//! matching on the sphere.

mod corpt;
mod energy;
mod rpt;
mod targets;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::divergence::Route;
use crate::entropy::{EntropyKind, EntropySpec};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sliced::{sample_directions, sliced_rank_divergence, DirectionSet, SampleSet};

pub use corpt::co_rpt_step;
pub use energy::{
    clamp_rank, prox_objective, rank_energy, rank_energy_gradient, rank_prox, rank_prox_with,
    ProxOutcome, RankEnergy, RANK_CLAMP,
};
pub use rpt::{rpt_step, rpt_step_with_directions};
pub use targets::{gaussian_cloud, ToyTarget};

/// Directions used for the energy diagnostic. They are fixed for a whole run
/// so the trace is comparable across steps.
pub const DIAGNOSTIC_DIRECTIONS: usize = 32;

/// `start + (end − start)·t/(T − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub start: f64,
    pub end: f64,
}

impl Linear {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(value, value)
    }

    pub fn at(&self, step: usize, total_steps: usize) -> f64 {
        if total_steps <= 1 {
            return self.start;
        }
        let t = step.min(total_steps - 1) as f64 / (total_steps - 1) as f64;
        self.start + (self.end - self.start) * t
    }

    /// The schedule rounded to the nearest integer, at least 1.
    pub fn at_rounded(&self, step: usize, total_steps: usize) -> usize {
        (self.at(step, total_steps).round() as usize).max(1)
    }
}

/// Settings shared by both dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Histogram order `K`, rounded at each step.
    pub order: Linear,
    /// Logistic smoothing width of the soft ranks; `0` gives hard ranks.
    pub tau: Linear,
    /// Outer step size `ε`.
    pub eps: Linear,
    /// Trust `η` of the proximal tether.
    pub eta: f64,
    pub inner_steps: usize,
    pub inner_lr: f64,
    /// Cap on the correction: per slice for sliced transport, per particle
    /// increment norm for the center-outward update.
    pub clip_cap: Option<f64>,
    pub generator: EntropySpec,
    pub total_steps: usize,
    /// Reorder refined ranks to be nondecreasing in the particle order.
    pub monotone_coupling: bool,
}

/// Values of the annealed parameters at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub order: usize,
    pub tau: f64,
    pub eps: f64,
}

impl Schedule {
    /// The annealing used for the two-dimensional toy targets: KL generator,
    /// η = 0.5, ε 0.20 → 0.15, τ 0.30 → 0.10, K 80 → 128, over 400 steps.
    pub fn toy_2d() -> Self {
        let eta = 0.5;
        Self {
            order: Linear::new(80.0, 128.0),
            tau: Linear::new(0.30, 0.10),
            eps: Linear::new(0.20, 0.15),
            eta,
            inner_steps: 10,
            inner_lr: 0.1 * eta,
            clip_cap: None,
            generator: EntropySpec::new(EntropyKind::Kl),
            total_steps: 400,
            monotone_coupling: true,
        }
    }

    pub fn at(&self, step: usize) -> StepParams {
        StepParams {
            order: self.order.at_rounded(step, self.total_steps),
            tau: self.tau.at(step, self.total_steps),
            eps: self.eps.at(step, self.total_steps),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: String| Err(Error::Config(why));
        for (name, s) in [("order", self.order), ("eps", self.eps)] {
            if !(s.start > 0.0 && s.end > 0.0 && s.start.is_finite() && s.end.is_finite()) {
                return bad(format!("{name} schedule endpoints must be positive, got {s:?}"));
            }
        }
        if self.order.start.round() < 1.0 || self.order.end.round() < 1.0 {
            return bad("order schedule must round to K ≥ 1".into());
        }
        if !(self.tau.start >= 0.0 && self.tau.end >= 0.0) {
            return bad(format!("tau schedule must be nonnegative, got {:?}", self.tau));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad(format!("η must be positive, got {}", self.eta));
        }
        if self.inner_steps == 0 || !(self.inner_lr > 0.0) {
            return bad("need at least one inner step and a positive inner learning rate".into());
        }
        if let Some(c) = self.clip_cap {
            if !(c > 0.0) {
                return bad(format!("clip cap must be positive, got {c}"));
            }
        }
        if !self.generator.is_differentiable() {
            return Err(Error::NotDifferentiable(self.generator.kind.name()));
        }
        Ok(())
    }
}

/// Sliced rank-proximal transport.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportConfig {
    /// Directions drawn per outer step.
    pub slices: usize,
    #[serde(flatten)]
    pub schedule: Schedule,
}

impl TransportConfig {
    /// [`Schedule::toy_2d`] with ten slices.
    pub fn toy_2d() -> Self {
        Self {
            slices: 10,
            schedule: Schedule::toy_2d(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.slices == 0 {
            return Err(Error::Config("need at least one slice".into()));
        }
        self.schedule.validate()
    }
}

/// Center-outward rank-proximal transport.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoRptConfig {
    #[serde(flatten)]
    pub schedule: Schedule,
    /// Weight of the matched reference direction in the angular blend.
    pub beta: f64,
    /// Whiten with a ZCA transform fitted on the recentred reference.
    pub whiten: bool,
}

impl CoRptConfig {
    pub fn toy_2d() -> Self {
        Self {
            schedule: Schedule::toy_2d(),
            beta: 0.5,
            whiten: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Config(format!("β must lie in [0, 1], got {}", self.beta)));
        }
        self.schedule.validate()
    }
}

/// Either dynamics, as selected by the driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "kebab-case")]
pub enum Dynamics {
    Rpt(TransportConfig),
    CoRpt(CoRptConfig),
}

impl Dynamics {
    pub fn schedule(&self) -> &Schedule {
        match self {
            Self::Rpt(c) => &c.schedule,
            Self::CoRpt(c) => &c.schedule,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Rpt(c) => c.validate(),
            Self::CoRpt(c) => c.validate(),
        }
    }

    pub fn step(&self, state: &ParticleState, reference: &SampleSet, step: usize) -> Result<ParticleState> {
        match self {
            Self::Rpt(c) => rpt_step(state, reference, c, step),
            Self::CoRpt(c) => co_rpt_step(state, reference, c, step),
        }
    }
}

/// One row of the energy trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Number of updates applied so far.
    pub step: usize,
    /// Parameters of the update that produced this state (of step 0 for the
    /// initial state). The energy is measured at this order.
    pub order: usize,
    pub tau: f64,
    pub eps: f64,
    /// Sliced rank energy with hard ranks.
    pub energy: f64,
    /// Mean Euclidean displacement of the update (0 for the initial state).
    pub mean_displacement: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    pub positions: SampleSet,
    /// Updates applied so far.
    pub step_index: usize,
    /// Base seed; step `t` draws its randomness from stream `t`.
    pub seed: u64,
    pub trace: Vec<StepRecord>,
}

impl ParticleState {
    pub fn new(positions: SampleSet, seed: u64) -> Self {
        Self {
            positions,
            step_index: 0,
            seed,
            trace: Vec::new(),
        }
    }

    /// Directions shared by every energy evaluation of this run.
    pub fn diagnostic_directions(&self) -> Result<DirectionSet> {
        sample_directions(
            self.positions.dim(),
            DIAGNOSTIC_DIRECTIONS,
            derive_seed(self.seed, u64::MAX),
            false,
        )
    }

    /// Sliced rank energy against `reference` with hard ranks.
    pub fn energy(&self, reference: &SampleSet, order: usize, spec: &EntropySpec) -> Result<f64> {
        let dirs = self.diagnostic_directions()?;
        Ok(sliced_rank_divergence(&self.positions, reference, order, spec, &dirs, Route::HARD, 0)?.value())
    }

    /// The successor state with new positions and its trace row.
    pub(crate) fn advance(
        &self,
        positions: Vec<f64>,
        reference: &SampleSet,
        schedule: &Schedule,
        params: StepParams,
    ) -> Result<Self> {
        let dim = self.positions.dim();
        if let Some(i) = positions.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation(format!(
                "particle {} left the finite range at step {}",
                i / dim,
                self.step_index
            )));
        }
        let n = self.positions.len();
        let mean_displacement = positions
            .chunks_exact(dim)
            .zip(self.positions.rows())
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
            .sum::<f64>()
            / n as f64;
        let mut next = Self {
            positions: SampleSet::new(positions, dim, self.positions.seed())?,
            step_index: self.step_index + 1,
            seed: self.seed,
            trace: self.trace.clone(),
        };
        let energy = next.energy(reference, params.order, &schedule.generator)?;
        next.trace.push(StepRecord {
            step: next.step_index,
            order: params.order,
            tau: params.tau,
            eps: params.eps,
            energy,
            mean_displacement,
        });
        Ok(next)
    }

    fn record_initial(&mut self, reference: &SampleSet, schedule: &Schedule) -> Result<()> {
        if !self.trace.is_empty() {
            return Ok(());
        }
        let params = schedule.at(0);
        let energy = self.energy(reference, params.order, &schedule.generator)?;
        self.trace.push(StepRecord {
            step: self.step_index,
            order: params.order,
            tau: params.tau,
            eps: params.eps,
            energy,
            mean_displacement: 0.0,
        });
        Ok(())
    }
}

/// Runs `total_steps` updates from `initial` and returns copies of the states
/// after each requested number of steps, in increasing order, followed by the
/// final state if it was not requested. With zero total steps only the initial
/// state is returned.
pub fn run_transport(
    initial: ParticleState,
    reference: &SampleSet,
    dynamics: &Dynamics,
    snapshots: &[usize],
) -> Result<Vec<ParticleState>> {
    dynamics.validate()?;
    if reference.dim() != initial.positions.dim() {
        return Err(Error::DimensionMismatch {
            expected: initial.positions.dim(),
            got: reference.dim(),
        });
    }
    let schedule = dynamics.schedule();
    let total = schedule.total_steps;
    if let Some(&t) = snapshots.iter().find(|&&t| t > total) {
        return Err(Error::Config(format!("snapshot {t} lies beyond the {total} total steps")));
    }
    let mut state = initial;
    state.record_initial(reference, schedule)?;
    if total == 0 {
        return Ok(vec![state]);
    }
    let mut wanted: Vec<usize> = snapshots.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let mut out = Vec::with_capacity(wanted.len());
    let mut next = wanted.iter().copied().peekable();
    for t in 0..=total {
        if next.peek() == Some(&t) {
            out.push(state.clone());
            next.next();
        }
        if t < total {
            state = dynamics.step(&state, reference, t)?;
        }
    }
    if !wanted.contains(&total) {
        out.push(state);
    }
    Ok(out)
}

/// Writes positions as CSV with columns `x0, x1, …`. A header line, if given,
/// is written first as a `#` comment.
pub fn write_positions_csv(state: &ParticleState, path: impl AsRef<Path>, header: Option<&str>) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    if let Some(h) = header {
        writeln!(w, "# {h}")?;
    }
    let dim = state.positions.dim();
    let names: Vec<String> = (0..dim).map(|j| format!("x{j}")).collect();
    writeln!(w, "{}", names.join(","))?;
    for row in state.positions.rows() {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `step,K,tau,eps,energy` rows.
pub fn write_trace_csv(trace: &[StepRecord], path: impl AsRef<Path>, header: Option<&str>) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    if let Some(h) = header {
        writeln!(w, "# {h}")?;
    }
    writeln!(w, "step,K,tau,eps,energy")?;
    for r in trace {
        writeln!(w, "{},{},{},{},{}", r.step, r.order, r.tau, r.eps, r.energy)?;
    }
    w.flush()?;
    Ok(())
}
