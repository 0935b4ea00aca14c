use rand::RngCore;

use super::nested::NestedSampler;
use super::slice::{weighted_slice_step, SliceChainState};
use super::SamplerConfig;
use crate::error::{usage, Result};
use crate::logspace::{ln_abs_diff_exp, ln_add_exp, LogAccumulator};
use crate::model::{Point, TargetProblem};
use crate::special::{beta_k1_order_statistic_mean, beta_k1_order_statistic_variance};
use crate::stats::{bin_index, chi_square_critical_99, chi_square_statistic};
use crate::weights::WeightFunction;

const KERNEL_TOLERANCE: f64 = 1e-12;
const KERNEL_MAX_NODES: usize = 1 << 20;

/// `P(L(X') ≤ z | L(X) = y)` for one weighted slice step:
/// `∫_{[0, y∧z]} (1 - Z(z)/Z(u)) dW(u) / W(y)`, atom at zero included.
///
/// The Stieltjes integral is taken on nodes equally spaced in `ln Z(u)`,
/// with step halving until successive values agree.
pub fn ordinate_transition_probability(
    problem: &dyn TargetProblem,
    weight: &WeightFunction,
    log_y: f64,
    log_z: f64,
) -> Result<f64> {
    let top = log_y.min(log_z);
    let ln_zz = problem.log_upper_cumulant(log_z)?;
    let ln_z_top = problem.log_upper_cumulant(top)?;
    problem.log_inverse_cumulant(ln_z_top)?;
    let ln_w_y = weight.log_cumulative(log_y)?;

    // integrand g(u) = 1 - Z(z)/Z(u) on the log scale; ≥ 0 for u ≤ z
    let ln_g = |ln_zu: f64| -> f64 {
        let r = ln_zz - ln_zu;
        if r >= 0.0 {
            f64::NEG_INFINITY
        } else {
            crate::logspace::ln_one_minus_exp(r)
        }
    };
    let atom = ln_g(0.0) + weight.log_cumulative(f64::NEG_INFINITY)?;

    let integrate = |nodes: usize| -> Result<f64> {
        let mut acc = LogAccumulator::default();
        acc.push(atom);
        let h = -ln_z_top / nodes as f64;
        let mut prev_w = weight.log_cumulative(top)?;
        let mut prev_g = ln_g(ln_z_top);
        for j in 1..=nodes {
            let ln_s = if j == nodes {
                0.0
            } else {
                ln_z_top + j as f64 * h
            };
            let log_u = if j == nodes {
                f64::NEG_INFINITY
            } else {
                problem.log_inverse_cumulant(ln_s)?.min(top)
            };
            let w = weight.log_cumulative(log_u)?;
            let g = ln_g(ln_s);
            if prev_w > w {
                acc.push(
                    ln_add_exp(prev_g, g) - std::f64::consts::LN_2 + ln_abs_diff_exp(prev_w, w),
                );
            }
            prev_w = w;
            prev_g = g;
        }
        Ok((acc.ln() - ln_w_y).exp())
    };

    let mut nodes = 64;
    let mut value = integrate(nodes)?;
    while nodes < KERNEL_MAX_NODES {
        nodes *= 2;
        let refined = integrate(nodes)?;
        let change = (refined - value).abs();
        value = refined;
        if change < KERNEL_TOLERANCE {
            break;
        }
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Fraction of `steps` independent one-step moves from `x` that do not
/// raise the likelihood.
pub fn empirical_holding_frequency(
    problem: &dyn TargetProblem,
    weight: &WeightFunction,
    x: &Point,
    steps: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    if steps == 0 {
        return usage("need at least one step");
    }
    let start = SliceChainState::new(problem, x.clone());
    let mut down = 0usize;
    for _ in 0..steps {
        let next = weighted_slice_step(&start, problem, weight, rng)?;
        if next.log_likelihood <= start.log_likelihood {
            down += 1;
        }
    }
    Ok(down as f64 / steps as f64)
}

/// Probability of each bin of `s = Z(L(X))` under the weighted target,
/// whose ordinate density is `-W(y)Z'(y)/Z_w`. Bins are given by their
/// `ln s` edges, ascending, including the outer edges.
pub fn ordinate_bin_probabilities(
    problem: &dyn TargetProblem,
    weight: &WeightFunction,
    ln_s_edges: &[f64],
) -> Result<Vec<f64>> {
    if ln_s_edges.len() < 2 {
        return usage("need at least two bin edges");
    }
    const PER_BIN: usize = 400;
    let mut masses = Vec::with_capacity(ln_s_edges.len() - 1);
    for pair in ln_s_edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let h = (b - a) / PER_BIN as f64;
        let mut acc = LogAccumulator::default();
        let mut prev_s = a;
        let mut prev_w = weight.log_cumulative(problem.log_inverse_cumulant(a)?)?;
        for j in 1..=PER_BIN {
            let ln_s = if j == PER_BIN { b } else { a + j as f64 * h };
            let w = weight.log_cumulative(problem.log_inverse_cumulant(ln_s)?)?;
            acc.push(
                ln_add_exp(prev_w, w) - std::f64::consts::LN_2 + ln_abs_diff_exp(ln_s, prev_s),
            );
            prev_s = ln_s;
            prev_w = w;
        }
        masses.push(acc.ln());
    }
    let mut total = LogAccumulator::default();
    for &m in &masses {
        total.push(m);
    }
    let ln_total = total.ln();
    Ok(masses.into_iter().map(|m| (m - ln_total).exp()).collect())
}

/// Result of a χ² goodness-of-fit test.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub critical: f64,
    pub dof: usize,
    pub counts: Vec<u64>,
    pub probabilities: Vec<f64>,
}

impl ChiSquareReport {
    pub fn passed(&self) -> bool {
        self.statistic <= self.critical
    }
}

/// χ² test of sampled ordinates against the weighted ordinate law, on
/// `bins` roughly equiprobable bins in `s = Z(y)`.
pub fn ordinate_law_chi_square(
    problem: &dyn TargetProblem,
    weight: &WeightFunction,
    log_ordinates: &[f64],
    bins: usize,
) -> Result<ChiSquareReport> {
    if bins < 2 {
        return usage("need at least two bins");
    }
    if log_ordinates.is_empty() {
        return usage("no ordinates to test");
    }
    let edges = equiprobable_edges(problem, weight, bins)?;
    let probabilities = ordinate_bin_probabilities(problem, weight, &edges)?;
    let mut counts = vec![0u64; bins];
    for &y in log_ordinates {
        let ln_s = problem.log_upper_cumulant(y)?;
        counts[bin_index(&edges[1..bins], ln_s)] += 1;
    }
    let statistic = chi_square_statistic(&counts, &probabilities)?;
    let dof = bins - 1;
    Ok(ChiSquareReport {
        statistic,
        critical: chi_square_critical_99(dof)?,
        dof,
        counts,
        probabilities,
    })
}

/// Edges in `ln s`, from the clamp floor to 0, splitting the weighted
/// ordinate law into `bins` near-equal parts.
fn equiprobable_edges(
    problem: &dyn TargetProblem,
    weight: &WeightFunction,
    bins: usize,
) -> Result<Vec<f64>> {
    const NODES: usize = 20_000;
    let lo = crate::logspace::LN_MIN_CUMULANT;
    let h = -lo / NODES as f64;
    let grid: Vec<f64> = (0..=NODES)
        .map(|j| if j == NODES { 0.0 } else { lo + j as f64 * h })
        .collect();
    let mut cum = vec![f64::NEG_INFINITY; NODES + 1];
    let mut acc = LogAccumulator::default();
    let mut prev_w = weight.log_cumulative(problem.log_inverse_cumulant(grid[0])?)?;
    acc.push(prev_w + grid[0]);
    cum[0] = acc.ln();
    for j in 1..=NODES {
        let w = weight.log_cumulative(problem.log_inverse_cumulant(grid[j])?)?;
        acc.push(
            ln_add_exp(prev_w, w) - std::f64::consts::LN_2 + ln_abs_diff_exp(grid[j], grid[j - 1]),
        );
        cum[j] = acc.ln();
        prev_w = w;
    }
    let total = cum[NODES];
    let frac: Vec<f64> = cum.iter().map(|c| (c - total).exp()).collect();
    let mut edges = vec![lo];
    let mut j = 0;
    for b in 1..bins {
        let target = b as f64 / bins as f64;
        while frac[j + 1] < target {
            j += 1;
        }
        let t = (target - frac[j]) / (frac[j + 1] - frac[j]);
        edges.push(grid[j] + t * (grid[j + 1] - grid[j]));
    }
    edges.push(0.0);
    Ok(edges)
}

/// Outcome of the first-step shrinkage check `E Z(y₁) = K/(K+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkageReport {
    pub live_points: usize,
    pub mean: f64,
    pub expected: f64,
    pub std_error: f64,
}

impl ShrinkageReport {
    pub fn within(&self, k_se: f64) -> bool {
        (self.mean - self.expected).abs() <= k_se * self.std_error
    }
}

/// Mean of `Z(y₁)` over `reps` independent first nested-sampling steps.
pub fn nested_shrinkage_check(
    problem: &dyn TargetProblem,
    live_points: usize,
    reps: usize,
    seed: u64,
) -> Result<ShrinkageReport> {
    if reps == 0 {
        return usage("need at least one repetition");
    }
    let mut sum = 0.0;
    for r in 0..reps {
        let cfg = SamplerConfig::new(1, 0, seed.wrapping_add(r as u64));
        let mut s = NestedSampler::new(problem, live_points, &cfg)?;
        let y = s.step()?;
        sum += problem.log_upper_cumulant(y)?.exp();
    }
    Ok(ShrinkageReport {
        live_points,
        mean: sum / reps as f64,
        expected: beta_k1_order_statistic_mean(live_points)?,
        std_error: (beta_k1_order_statistic_variance(live_points)? / reps as f64).sqrt(),
    })
}
