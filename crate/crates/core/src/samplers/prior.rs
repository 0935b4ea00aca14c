use crate::error::{usage, Result};
use crate::logspace::log_sum_exp;
use crate::model::{EvidenceEstimate, Method, TargetProblem};
use crate::stats::sample_variance;

use super::SamplerConfig;

/// Plain Monte Carlo: `ln Ẑ = lse(ln L(xᵢ)) - ln n` over `n_samples`
/// independent prior draws. Burn-in is ignored.
pub fn estimate_prior_monte_carlo(
    problem: &dyn TargetProblem,
    config: &SamplerConfig,
) -> Result<EvidenceEstimate> {
    let n = config.n_samples;
    if n == 0 {
        return usage("prior Monte Carlo needs at least one draw");
    }
    let mut rng = config.rng();
    let lls: Vec<f64> = (0..n)
        .map(|_| problem.log_likelihood(&problem.sample_prior(&mut rng)))
        .collect();
    let log_z = log_sum_exp(&lls)? - (n as f64).ln();
    let rel: Vec<f64> = lls.iter().map(|l| (l - log_z).exp()).collect();
    let std_err_log = (sample_variance(&rel) / n as f64).sqrt();
    Ok(EvidenceEstimate {
        log_z,
        std_err_log,
        n_samples: n,
        method: Method::PriorMonteCarlo,
        likelihood_evals: n,
    })
}
