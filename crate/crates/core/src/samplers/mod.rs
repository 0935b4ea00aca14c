//! Estimation engines.

mod diagnostics;
mod energy;
mod nested;
mod prior;
mod slice;

pub use diagnostics::{
    empirical_holding_frequency, nested_shrinkage_check, ordinate_bin_probabilities,
    ordinate_law_chi_square, ordinate_transition_probability, ChiSquareReport, ShrinkageReport,
};
pub use energy::{energy_level_sampler, wang_landau_run, EnergyMode, EnergyRun, StepSchedule};
pub use nested::{nested_sampling_run, NestedOptions, NestedSampler};
pub use prior::estimate_prior_monte_carlo;
pub use slice::{
    estimate_harmonic_mean, estimate_weighted_slice, weighted_slice_step, SliceChain,
    SliceChainState,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{usage, Result};

/// Run-length and seeding options shared by the samplers.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Total steps or draws, burn-in included.
    pub n_samples: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Random-walk steps per constrained draw when a problem has no exact
    /// constrained sampler.
    pub mcmc_steps_per_constrained_draw: usize,
    pub record_trace: bool,
    /// Keep every `thin`-th post-burn-in step in the trace.
    pub thin: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n_samples: 10_000,
            burn_in: 1_000,
            seed: 20150601,
            mcmc_steps_per_constrained_draw: 20,
            record_trace: false,
            thin: 1,
        }
    }
}

impl SamplerConfig {
    pub fn new(n_samples: usize, burn_in: usize, seed: u64) -> Self {
        SamplerConfig {
            n_samples,
            burn_in,
            seed,
            ..Default::default()
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.n_samples {
            return usage(format!(
                "burn-in ({}) must be smaller than the sample count ({})",
                self.burn_in, self.n_samples
            ));
        }
        if self.thin == 0 {
            return usage("thinning interval must be at least 1");
        }
        if self.mcmc_steps_per_constrained_draw == 0 {
            return usage("need at least one MCMC step per constrained draw");
        }
        Ok(())
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Number of batches for batch-means standard errors.
pub const BATCHES: usize = 50;
