use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use vlmc::logspace::{ln_abs_diff_exp, LogAccumulator};
use vlmc::samplers::{
    estimate_harmonic_mean, estimate_prior_monte_carlo, estimate_weighted_slice,
    nested_sampling_run, SamplerConfig,
};
use vlmc::{EvidenceEstimate, OrdinateTrace, TargetProblem};

use crate::config::{ExperimentConfig, MethodSpec, PreparedMethod};
use crate::error::{CliError, CliResult};

/// Sampler settings for repetition `rep` of `config`.
pub fn sampler_config(config: &ExperimentConfig, rep: usize) -> SamplerConfig {
    let mut s = SamplerConfig::new(
        config.samples + config.burn_in,
        config.burn_in,
        config.seed.wrapping_add(rep as u64),
    );
    s.thin = config.thin;
    s.mcmc_steps_per_constrained_draw = config.mcmc_steps;
    s
}

/// One estimate with one method.
pub fn estimate_once(
    problem: &dyn TargetProblem,
    method: &PreparedMethod,
    sampler: &SamplerConfig,
) -> CliResult<(EvidenceEstimate, OrdinateTrace)> {
    Ok(match &method.spec {
        MethodSpec::PriorMc => {
            let mut s = sampler.clone();
            s.n_samples -= s.burn_in;
            (
                estimate_prior_monte_carlo(problem, &s)?,
                OrdinateTrace::default(),
            )
        }
        MethodSpec::Harmonic => estimate_harmonic_mean(problem, sampler)?,
        MethodSpec::WeightedSlice { .. } => {
            let w = method
                .weight
                .as_ref()
                .expect("weighted slice carries a weight");
            estimate_weighted_slice(problem, w, sampler)?
        }
        MethodSpec::Nested { .. } => {
            let opts = method.spec.nested_options().expect("nested options");
            nested_sampling_run(problem, opts, sampler)?
        }
    })
}

/// Summary of `R` repetitions of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub method: String,
    /// `ln` of the mean of `Ẑ` over repetitions.
    pub ln_mean_z: f64,
    /// `ln` of the root mean-squared error of `Ẑ` against the truth.
    pub ln_rmse: f64,
    pub mean_log_z: f64,
    pub std_log_z: f64,
    pub mean_likelihood_evals: f64,
    pub wall_clock_secs: f64,
    /// `ln Ẑ` of every repetition, in repetition order.
    pub log_z: Vec<f64>,
}

impl TableRow {
    pub fn mean_z(&self) -> f64 {
        self.ln_mean_z.exp()
    }

    pub fn rmse(&self) -> f64 {
        self.ln_rmse.exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkTable {
    pub problem: String,
    pub true_log_z: f64,
    pub repetitions: usize,
    pub rows: Vec<TableRow>,
}

/// Summaries computed in logs so that `Z` near the bottom of the double
/// range does not underflow when squared.
pub fn summarize(
    method: &str,
    log_z: Vec<f64>,
    true_log_z: f64,
    evals: f64,
    secs: f64,
) -> TableRow {
    let r = log_z.len() as f64;
    let mut mean = LogAccumulator::default();
    let mut sq = LogAccumulator::default();
    for &l in &log_z {
        mean.push(l);
        sq.push(2.0 * ln_abs_diff_exp(l, true_log_z));
    }
    let mean_log = log_z.iter().sum::<f64>() / r;
    let var = if log_z.len() > 1 {
        log_z.iter().map(|l| (l - mean_log).powi(2)).sum::<f64>() / (r - 1.0)
    } else {
        0.0
    };
    TableRow {
        method: method.to_string(),
        ln_mean_z: mean.ln() - r.ln(),
        ln_rmse: 0.5 * (sq.ln() - r.ln()),
        mean_log_z: mean_log,
        std_log_z: var.sqrt(),
        mean_likelihood_evals: evals,
        wall_clock_secs: secs,
        log_z,
    }
}

/// `R` repetitions of every method, seeds `base + rep`, run on the rayon
/// pool and merged in repetition order.
pub fn run_benchmark(config: &ExperimentConfig) -> CliResult<BenchmarkTable> {
    let (problem, methods) = config.prepare()?;
    if config.samples == 0 {
        return Err(CliError::Config("samples must be at least 1".into()));
    }
    let truth = problem.true_log_evidence()?;
    let mut rows = Vec::with_capacity(methods.len());
    for method in &methods {
        log::info!("{}: {} repetitions", method.label, config.repetitions);
        let start = Instant::now();
        let results: Vec<EvidenceEstimate> = (0..config.repetitions)
            .into_par_iter()
            .map(|rep| {
                estimate_once(problem.as_ref(), method, &sampler_config(config, rep))
                    .map(|(e, _)| e)
            })
            .collect::<CliResult<_>>()?;
        let secs = start.elapsed().as_secs_f64();
        let evals = results
            .iter()
            .map(|e| e.likelihood_evals as f64)
            .sum::<f64>()
            / results.len() as f64;
        let log_z = results.iter().map(|e| e.log_z).collect();
        rows.push(summarize(&method.label, log_z, truth, evals, secs));
    }
    Ok(BenchmarkTable {
        problem: problem.name(),
        true_log_z: truth,
        repetitions: config.repetitions,
        rows,
    })
}

impl BenchmarkTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "method,mean_z,ln_mean_z,rmse,ln_rmse,mean_log_z,std_log_z,mean_likelihood_evals,wall_clock_secs\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:e},{},{:e},{},{},{},{},{:.3}",
                r.method,
                r.mean_z(),
                r.ln_mean_z,
                r.rmse(),
                r.ln_rmse,
                r.mean_log_z,
                r.std_log_z,
                r.mean_likelihood_evals,
                r.wall_clock_secs
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "problem: {}\ntruth: Z = {:.4e} (ln Z = {:.6})\nrepetitions: {}\n\n",
            self.problem,
            self.true_log_z.exp(),
            self.true_log_z,
            self.repetitions
        );
        let width = self
            .rows
            .iter()
            .map(|r| r.method.len())
            .max()
            .unwrap_or(6)
            .max(6);
        let _ = writeln!(
            out,
            "{:<width$}  {:>12}  {:>12}  {:>12}  {:>10}  {:>12}  {:>9}",
            "method", "mean Z", "RMSE", "mean ln Z", "sd ln Z", "evals", "secs"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>12.4e}  {:>12.4e}  {:>12.4}  {:>10.4}  {:>12.0}  {:>9.2}",
                r.method,
                r.mean_z(),
                r.rmse(),
                r.mean_log_z,
                r.std_log_z,
                r.mean_likelihood_evals,
                r.wall_clock_secs
            );
        }
        out
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("table.csv"), self.to_csv())?;
        std::fs::write(dir.join("table.txt"), self.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_repetition_rmse_is_absolute_error() {
        let row = summarize("m", vec![-3.0], -2.5, 1.0, 0.0);
        let want = ((-2.5f64).exp() - (-3.0f64).exp()).abs();
        assert!((row.rmse() - want).abs() < 1e-15);
        assert_eq!(row.std_log_z, 0.0);
        assert_eq!(row.mean_z(), (-3.0f64).exp());
    }

    #[test]
    fn tiny_evidence_does_not_underflow() {
        let row = summarize("m", vec![-700.0, -701.0], -700.5, 1.0, 0.0);
        assert!(row.ln_rmse.is_finite());
        assert!(row.ln_mean_z > -701.0 && row.ln_mean_z < -700.0);
    }
}
