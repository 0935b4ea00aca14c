use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use super::{SamplerConfig, BATCHES};
use crate::error::{Result, VlmcError};
use crate::logspace::{log_sum_exp, LogAccumulator};
use crate::model::{EvidenceEstimate, Method, OrdinateTrace, Point, TargetProblem};
use crate::stats::{batch_ranges, sample_variance};
use crate::weights::WeightFunction;

/// Current point and auxiliary ordinate of a weighted slice chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceChainState {
    pub x: Point,
    pub log_likelihood: f64,
    pub log_u: f64,
}

impl SliceChainState {
    pub fn new(problem: &dyn TargetProblem, x: Point) -> Self {
        let log_likelihood = problem.log_likelihood(&x);
        SliceChainState {
            x,
            log_likelihood,
            log_u: f64::NEG_INFINITY,
        }
    }
}

/// Relative backoff below the supremum when a slice comes back empty.
const SUPREMUM_BACKOFF: f64 = 1e-12;

/// One Gibbs sweep: `u | x` from the weight, then `x | u` from the prior
/// restricted to `{L ≥ u}`.
pub fn weighted_slice_step(
    state: &SliceChainState,
    problem: &dyn TargetProblem,
    weight: &WeightFunction,
    rng: &mut dyn RngCore,
) -> Result<SliceChainState> {
    let mut log_u = weight.sample_log_u(rng, state.log_likelihood)?;
    let x = match problem.constrained_prior_sample(rng, log_u) {
        Ok(x) => x,
        Err(VlmcError::Domain(_)) => {
            let sup = problem.log_likelihood_supremum();
            let clamped = sup - SUPREMUM_BACKOFF * sup.abs().max(1.0);
            if log_u <= clamped {
                return Err(VlmcError::Runtime(format!(
                    "constrained prior draw failed at ln u = {log_u}"
                )));
            }
            log_u = clamped;
            problem
                .constrained_prior_sample(rng, log_u)
                .map_err(|e| VlmcError::Runtime(format!("constrained prior draw failed: {e}")))?
        }
        Err(e) => return Err(e),
    };
    let log_likelihood = problem.log_likelihood(&x);
    debug_assert!(
        log_u <= log_likelihood + 1e-9 * log_likelihood.abs().max(1.0),
        "slice invariant broken: ln u = {log_u} > ln L = {log_likelihood}"
    );
    Ok(SliceChainState {
        x,
        log_likelihood,
        log_u: log_u.min(log_likelihood),
    })
}

/// A weighted slice chain that owns its random stream.
pub struct SliceChain<'a> {
    problem: &'a dyn TargetProblem,
    weight: &'a WeightFunction,
    rng: ChaCha8Rng,
    state: SliceChainState,
}

impl<'a> SliceChain<'a> {
    /// Start from a prior draw.
    pub fn new(
        problem: &'a dyn TargetProblem,
        weight: &'a WeightFunction,
        mut rng: ChaCha8Rng,
    ) -> Self {
        let x = problem.sample_prior(&mut rng);
        let state = SliceChainState::new(problem, x);
        SliceChain {
            problem,
            weight,
            rng,
            state,
        }
    }

    pub fn state(&self) -> &SliceChainState {
        &self.state
    }

    pub fn step(&mut self) -> Result<&SliceChainState> {
        self.state = weighted_slice_step(&self.state, self.problem, self.weight, &mut self.rng)?;
        Ok(&self.state)
    }
}

/// Run the chain and reweight draws by `1/W(L)`.
///
/// `ln Ẑ = lse(ln L + ln q) - lse(ln q)` over post-burn-in draws, with a
/// batch-means standard error.
pub fn estimate_weighted_slice(
    problem: &dyn TargetProblem,
    weight: &WeightFunction,
    config: &SamplerConfig,
) -> Result<(EvidenceEstimate, OrdinateTrace)> {
    config.validate()?;
    let mut chain = SliceChain::new(problem, weight, config.rng());
    let kept = config.n_samples - config.burn_in;
    let mut lls = Vec::with_capacity(kept);
    let mut trace = OrdinateTrace::default();
    for i in 0..config.n_samples {
        let st = chain.step()?;
        if i >= config.burn_in {
            lls.push(st.log_likelihood);
        }
        if config.record_trace && i % config.thin == 0 {
            if i < config.burn_in {
                trace.burn_in += 1;
            }
            trace.ordinates.push(st.log_likelihood);
            trace.first_coords.push(st.x.coords()[0]);
        }
    }
    let lqs = lls
        .iter()
        .map(|&y| weight.importance_log_weight(y))
        .collect::<Result<Vec<f64>>>()?;
    let (log_z, std_err_log) = self_normalized(&lls, &lqs)?;
    Ok((
        EvidenceEstimate {
            log_z,
            std_err_log,
            n_samples: kept,
            method: Method::WeightedSlice,
            likelihood_evals: config.n_samples + 1,
        },
        trace,
    ))
}

/// Harmonic mean of likelihoods: the uniform-weight slice estimator.
pub fn estimate_harmonic_mean(
    problem: &dyn TargetProblem,
    config: &SamplerConfig,
) -> Result<(EvidenceEstimate, OrdinateTrace)> {
    let (mut est, trace) = estimate_weighted_slice(problem, &WeightFunction::uniform(), config)?;
    est.method = Method::HarmonicMean;
    Ok((est, trace))
}

/// Ratio estimate and its delta-method batch-means error on the log scale.
fn self_normalized(lls: &[f64], lqs: &[f64]) -> Result<(f64, f64)> {
    let num: Vec<f64> = lls.iter().zip(lqs).map(|(l, q)| l + q).collect();
    let log_z = log_sum_exp(&num)? - log_sum_exp(lqs)?;

    let ranges = batch_ranges(lls.len(), BATCHES);
    if ranges.len() < 2 {
        return Ok((log_z, 0.0));
    }
    let mut ln_a = Vec::with_capacity(ranges.len());
    let mut ln_b = Vec::with_capacity(ranges.len());
    for r in &ranges {
        let len = (r.len() as f64).ln();
        let mut a = LogAccumulator::default();
        let mut b = LogAccumulator::default();
        for i in r.clone() {
            a.push(num[i]);
            b.push(lqs[i]);
        }
        ln_a.push(a.ln() - len);
        ln_b.push(b.ln() - len);
    }
    let scale = ln_a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let alpha: Vec<f64> = ln_a.iter().map(|v| (v - scale).exp()).collect();
    let resid: Vec<f64> = alpha
        .iter()
        .zip(&ln_b)
        .map(|(a, lb)| a - (lb + log_z - scale).exp())
        .collect();
    let mean_alpha = alpha.iter().sum::<f64>() / alpha.len() as f64;
    let se = (sample_variance(&resid) / ranges.len() as f64).sqrt() / mean_alpha;
    Ok((log_z, se))
}
