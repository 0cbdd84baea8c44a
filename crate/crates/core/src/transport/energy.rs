//! The rank energy of a vector of ranks and its proximal map.

use crate::entropy::EntropySpec;
use crate::error::{Error, Result};
use crate::univariate::BernsteinBasis;

/// Ranks are kept in `[RANK_CLAMP, 1 − RANK_CLAMP]` so the empirical quantile
/// never lands on the flat extension beyond the extreme order statistics.
pub const RANK_CLAMP: f64 = 1e-4;

/// Halvings tried before an inner step is abandoned.
const MAX_HALVINGS: usize = 40;

#[inline]
pub fn clamp_rank(u: f64) -> f64 {
    u.clamp(RANK_CLAMP, 1.0 - RANK_CLAMP)
}

/// Energy `(1/(K+1)) Σ_n f((K+1) Q(n))` of the Bernstein histogram
/// `Q(n) = (1/N) Σ_i b_{n,K}(U_i)`, with its gradient in `U`.
#[derive(Debug, Clone)]
pub struct RankEnergy {
    basis: BernsteinBasis,
    spec: EntropySpec,
}

impl RankEnergy {
    pub fn new(order: usize, spec: EntropySpec) -> Self {
        Self {
            basis: BernsteinBasis::new(order),
            spec,
        }
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }

    /// The Bernstein histogram of `u`.
    pub fn histogram(&self, u: &[f64]) -> Vec<f64> {
        let k = self.order();
        let mut q = vec![0.0; k + 1];
        let mut row = vec![0.0; k + 1];
        for &x in u {
            let r = self.basis.eval_support(x, 1.0 - x, &mut row);
            q[r.clone()].iter_mut().zip(&row[r]).for_each(|(a, b)| *a += b);
        }
        let n = u.len() as f64;
        q.iter_mut().for_each(|a| *a /= n);
        q
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        self.value_of(&self.histogram(u))
    }

    /// Energy of an already computed histogram.
    pub fn value_of(&self, q: &[f64]) -> f64 {
        let k1 = q.len() as f64;
        let total: f64 = q.iter().map(|&p| self.spec.value(k1 * p)).sum();
        (total / k1).max(0.0)
    }

    /// `∂E/∂U_i = (1/N) Σ_n f'((K+1) Q(n)) b'_{n,K}(U_i)`.
    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.gradient_at(u, &self.histogram(u))
    }

    /// Gradient given the histogram `q` of `u`.
    pub fn gradient_at(&self, u: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        if !self.spec.is_differentiable() {
            return Err(Error::NotDifferentiable(self.spec.kind.name()));
        }
        let k1 = q.len() as f64;
        let slopes: Vec<f64> = q.iter().map(|&p| self.spec.slope(k1 * p)).collect();
        let n = u.len() as f64;
        let mut scratch = vec![0.0; self.order().max(1)];
        let mut row = vec![0.0; q.len()];
        Ok(u.iter()
            .map(|&x| {
                let r = self.basis.derivative_support(x, 1.0 - x, &mut scratch, &mut row);
                row[r.clone()].iter().zip(&slopes[r]).map(|(d, s)| d * s).sum::<f64>() / n
            })
            .collect())
    }
}

/// Rank energy of `u` with `order` bins.
pub fn rank_energy(u: &[f64], order: usize, spec: &EntropySpec) -> f64 {
    let clamped: Vec<f64> = u.iter().map(|&x| clamp_rank(x)).collect();
    RankEnergy::new(order, *spec).value(&clamped)
}

/// Gradient of [`rank_energy`]; fails for generators without a derivative.
pub fn rank_energy_gradient(u: &[f64], order: usize, spec: &EntropySpec) -> Result<Vec<f64>> {
    let clamped: Vec<f64> = u.iter().map(|&x| clamp_rank(x)).collect();
    RankEnergy::new(order, *spec).gradient(&clamped)
}

/// Objective values around one proximal solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxOutcome {
    pub ranks: Vec<f64>,
    pub objective_start: f64,
    pub objective_end: f64,
    /// Inner steps actually taken (fewer than requested if halving gave up).
    pub steps_taken: usize,
}

/// The proximal objective `N·E(U) + ‖U − U₀‖²/(2η)` for `N` ranks.
///
/// The energy is an average over particles while the tether is a sum, so the
/// energy is scaled by `N`. Each rank then moves by an amount that does not
/// depend on how many particles share the histogram.
pub fn prox_objective(energy: &RankEnergy, u: &[f64], u0: &[f64], eta: f64) -> f64 {
    objective_with(energy.value(u), u, u0, eta)
}

fn objective_with(energy: f64, u: &[f64], u0: &[f64], eta: f64) -> f64 {
    let tether: f64 = u.iter().zip(u0).map(|(a, b)| (a - b) * (a - b)).sum();
    u.len() as f64 * energy + tether / (2.0 * eta)
}

/// Approximates the minimiser of [`prox_objective`] by `inner_steps`
/// projected gradient steps from `U₀`. A step that would raise the objective
/// is retried with half the learning rate, so the objective never increases.
pub fn rank_prox(
    u0: &[f64],
    order: usize,
    spec: &EntropySpec,
    eta: f64,
    inner_steps: usize,
    inner_lr: f64,
) -> Result<Vec<f64>> {
    let energy = RankEnergy::new(order, *spec);
    rank_prox_with(&energy, u0, eta, inner_steps, inner_lr).map(|o| o.ranks)
}

/// [`rank_prox`] with a prebuilt energy, reporting the objective before and after.
pub fn rank_prox_with(
    energy: &RankEnergy,
    u0: &[f64],
    eta: f64,
    inner_steps: usize,
    inner_lr: f64,
) -> Result<ProxOutcome> {
    if !(eta > 0.0) || !(inner_lr > 0.0) {
        return Err(Error::Config(format!(
            "prox needs η > 0 and a positive learning rate, got η={eta}, lr={inner_lr}"
        )));
    }
    let n = u0.len() as f64;
    let anchor: Vec<f64> = u0.iter().map(|&x| clamp_rank(x)).collect();
    let mut u = anchor.clone();
    let mut hist = energy.histogram(&u);
    let start = objective_with(energy.value_of(&hist), &u, &anchor, eta);
    let mut current = start;
    let mut lr = inner_lr;
    let mut taken = 0;
    let mut candidate = vec![0.0; u.len()];
    'outer: for _ in 0..inner_steps {
        let mut g = energy.gradient_at(&u, &hist)?;
        for ((gi, ui), ai) in g.iter_mut().zip(&u).zip(&anchor) {
            *gi = n * *gi + (ui - ai) / eta;
        }
        if let Some(i) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation(format!(
                "non-finite prox gradient at particle {i} (U={}, U0={}, η={eta}, lr={lr}, step {taken})",
                u[i], anchor[i]
            )));
        }
        let mut halvings = 0;
        loop {
            for ((c, ui), gi) in candidate.iter_mut().zip(&u).zip(&g) {
                *c = clamp_rank(ui - lr * gi);
            }
            let cand_hist = energy.histogram(&candidate);
            let value = objective_with(energy.value_of(&cand_hist), &candidate, &anchor, eta);
            if value <= current {
                std::mem::swap(&mut u, &mut candidate);
                hist = cand_hist;
                current = value;
                taken += 1;
                break;
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                break 'outer;
            }
            lr *= 0.5;
        }
    }
    Ok(ProxOutcome {
        ranks: u,
        objective_start: start,
        objective_end: current,
        steps_taken: taken,
    })
}
