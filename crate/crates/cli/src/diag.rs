use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vlmc::quadrature::uniform_law_check;
use vlmc::samplers::{
    empirical_holding_frequency, nested_shrinkage_check, ordinate_law_chi_square,
    ordinate_transition_probability, SliceChain,
};
use vlmc::stats::ks_critical_99;
use vlmc::{TargetProblem, WeightFunction};

use crate::config::{ExperimentConfig, MethodSpec};
use crate::error::CliResult;

/// Steps between recorded ordinates in the χ² test.
pub const DIAG_THIN: usize = 10;
const UNIFORM_LAW_DRAWS: usize = 10_000;
const HOLDING_STEPS: usize = 100_000;
const SHRINKAGE_LIVE_POINTS: usize = 20;
const SHRINKAGE_REPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagLine {
    pub name: String,
    pub statistic: f64,
    /// Pass when `statistic` is within `threshold` (meaning depends on the
    /// check: an upper bound, or an allowed absolute deviation).
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagReport {
    pub lines: Vec<DiagLine>,
}

impl DiagReport {
    pub fn all_passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }

    fn push(&mut self, name: impl Into<String>, statistic: f64, threshold: f64, passed: bool) {
        self.lines.push(DiagLine {
            name: name.into(),
            statistic,
            threshold,
            passed,
        });
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let _ = writeln!(
                out,
                "{} {}: statistic {:.6e}, threshold {:.6e}",
                if l.passed { "PASS" } else { "FAIL" },
                l.name,
                l.statistic,
                l.threshold
            );
        }
        out
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("diag.txt"), self.to_text())?;
        Ok(())
    }
}

/// Uniform law of `Z(L(X))`, the ordinate χ² test for each slice method
/// in the config (uniform, power(0.5) and default weights when there are
/// none), the one-half holding probability under `W = 1/Z`, and the
/// first-step nested shrinkage law.
pub fn run_diagnostics(config: &ExperimentConfig) -> CliResult<DiagReport> {
    let (problem, methods) = config.prepare()?;
    let p = problem.as_ref();
    let mut report = DiagReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let law = uniform_law_check(p, UNIFORM_LAW_DRAWS, &mut rng)?;
    let crit = ks_critical_99(law.n);
    report.push(
        "uniform law of Z(L(X)) (KS)",
        law.ks_statistic,
        crit,
        law.ks_statistic <= crit && !law.atom,
    );

    let mut weights: Vec<WeightFunction> = methods
        .iter()
        .filter_map(|m| match m.spec {
            MethodSpec::Harmonic => Some(WeightFunction::uniform()),
            MethodSpec::WeightedSlice { .. } => m.weight.clone(),
            _ => None,
        })
        .collect();
    if weights.is_empty() {
        weights = vec![
            WeightFunction::uniform(),
            WeightFunction::power(0.5)?,
            WeightFunction::truncated_inverse_cumulant(
                problem.clone(),
                config.problem.default_eta(),
            )?,
        ];
    }
    let records = config.samples.max(1);
    for (i, w) in weights.iter().enumerate() {
        let ys = stationary_ordinates(
            p,
            w,
            config.burn_in,
            records,
            config.seed.wrapping_add(1 + i as u64),
        )?;
        let r = ordinate_law_chi_square(p, w, &ys, config.bins.max(2))?;
        report.push(
            format!("ordinate density chi-square, {} ({} dof)", w.label(), r.dof),
            r.statistic,
            r.critical,
            r.passed(),
        );
    }

    holding_checks(&problem, &mut report, &mut rng)?;

    let s = nested_shrinkage_check(p, SHRINKAGE_LIVE_POINTS, SHRINKAGE_REPS, config.seed)?;
    report.push(
        format!("nested first-step shrinkage, K={}", s.live_points),
        (s.mean - s.expected).abs(),
        3.0 * s.std_error,
        s.within(3.0),
    );
    Ok(report)
}

fn stationary_ordinates(
    problem: &dyn TargetProblem,
    weight: &WeightFunction,
    burn_in: usize,
    records: usize,
    seed: u64,
) -> CliResult<Vec<f64>> {
    let mut chain = SliceChain::new(problem, weight, ChaCha8Rng::seed_from_u64(seed));
    for _ in 0..burn_in {
        chain.step()?;
    }
    let mut ys = Vec::with_capacity(records);
    for i in 0..records * DIAG_THIN {
        let y = chain.step()?.log_likelihood;
        if i % DIAG_THIN == 0 {
            ys.push(y);
        }
    }
    Ok(ys)
}

fn holding_checks(
    problem: &Arc<dyn TargetProblem>,
    report: &mut DiagReport,
    rng: &mut ChaCha8Rng,
) -> CliResult<()> {
    let p = problem.as_ref();
    let w = WeightFunction::truncated_inverse_cumulant(problem.clone(), 1e-300)?;
    // a point whose ordinate has upper cumulant near e^-10
    let x = p.constrained_prior_sample(rng, p.log_inverse_cumulant(-10.0)?)?;
    let y = p.log_likelihood(&x);
    let kernel = ordinate_transition_probability(p, &w, y, y)?;
    report.push(
        "holding probability kernel under W = 1/Z, |P - 1/2|",
        (kernel - 0.5).abs(),
        1e-8,
        (kernel - 0.5).abs() < 1e-8,
    );
    let freq = empirical_holding_frequency(p, &w, &x, HOLDING_STEPS, rng)?;
    let band = 3.0 * (0.25 / HOLDING_STEPS as f64).sqrt();
    report.push(
        "empirical holding frequency under W = 1/Z, |f - 1/2|",
        (freq - 0.5).abs(),
        band,
        (freq - 0.5).abs() <= band,
    );
    Ok(())
}
