use rand::{Rng, RngCore};
use rand_distr::Open01;

use crate::error::{usage, Result};
use crate::problems::DiscreteEnergyModel;

/// Stationary weighting of energy levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyMode {
    /// `e^{-s/T}`.
    Canonical { temperature: f64 },
    /// `1/N(s)`: flat in energy.
    Multicanonical,
    /// `1/Z(s)` with `Z(s)` the cumulative state count from the bottom.
    OneOverK,
}

/// Length, thinning and burn-in of an energy-level run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnergyRun {
    /// Number of recorded visits.
    pub visits: usize,
    /// Metropolis steps between records.
    pub thin: usize,
    pub burn_in: usize,
}

fn level_log_weights(model: &DiscreteEnergyModel, mode: EnergyMode) -> Result<Vec<f64>> {
    Ok(match mode {
        EnergyMode::Canonical { temperature } => {
            if !(temperature > 0.0) {
                return usage(format!("temperature must be positive, got {temperature}"));
            }
            model
                .level_energies()
                .iter()
                .map(|e| -e / temperature)
                .collect()
        }
        EnergyMode::Multicanonical => model
            .density_of_states()
            .iter()
            .map(|&n| -(n as f64).ln())
            .collect(),
        EnergyMode::OneOverK => model
            .cumulative_states()
            .iter()
            .map(|&z| -(z as f64).ln())
            .collect(),
    })
}

/// Metropolis over states with single-bit proposals; returns how many
/// recorded visits landed on each level.
pub fn energy_level_sampler(
    model: &DiscreteEnergyModel,
    mode: EnergyMode,
    run: EnergyRun,
    rng: &mut dyn RngCore,
) -> Result<Vec<u64>> {
    if run.thin == 0 {
        return usage("thinning interval must be at least 1");
    }
    let lw = level_log_weights(model, mode)?;
    let mut state = model.random_state(rng);
    let mut counts = vec![0u64; model.n_levels()];
    let total = run.burn_in + run.visits * run.thin;
    for t in 0..total {
        let prop = model.propose(state, rng);
        let v: f64 = rng.sample(Open01);
        if v.ln() < lw[model.level_of(prop)] - lw[model.level_of(state)] {
            state = prop;
        }
        if t >= run.burn_in && (t - run.burn_in + 1).is_multiple_of(run.thin) {
            counts[model.level_of(state)] += 1;
        }
    }
    Ok(counts)
}

/// Step sizes `γ_t` for the Wang–Landau update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepSchedule {
    /// `γ_t = 1/t`.
    InverseTime,
    /// `γ_t = min(1, d/t)` with `d` the number of levels.
    ScaledInverseTime,
}

impl StepSchedule {
    pub fn gamma(self, t: usize, levels: usize) -> f64 {
        let t = t as f64;
        match self {
            StepSchedule::InverseTime => 1.0 / t,
            StepSchedule::ScaledInverseTime => (levels as f64 / t).min(1.0),
        }
    }
}

/// Adaptive Wang–Landau over the energy levels of `model`.
///
/// Targets `P(x)/θ_{level(x)}` and updates
/// `ln θᵢ += γ_t (I{X_t ∈ level i} - 1/d)` after every step; returns the
/// normalized `θ̂`, which estimates the prior mass of each level.
pub fn wang_landau_run(
    model: &DiscreteEnergyModel,
    schedule: StepSchedule,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    if n == 0 {
        return usage("Wang-Landau needs at least one step");
    }
    let d = model.n_levels();
    let inv_d = 1.0 / d as f64;
    let mut ln_theta = vec![0.0f64; d];
    let mut state = model.random_state(rng);
    for t in 1..=n {
        let prop = model.propose(state, rng);
        let v: f64 = rng.sample(Open01);
        if v.ln() < ln_theta[model.level_of(state)] - ln_theta[model.level_of(prop)] {
            state = prop;
        }
        let g = schedule.gamma(t, d);
        let current = model.level_of(state);
        for (i, lt) in ln_theta.iter_mut().enumerate() {
            *lt += g * (if i == current { 1.0 } else { 0.0 } - inv_d);
        }
    }
    let m = ln_theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = ln_theta.iter().map(|l| (l - m).exp()).collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / total).collect())
}
