//! Deterministic evidence oracles built on the two one-dimensional forms
//! `Z = ∫₀^sup Z(y) dy = ∫₀¹ Λ(s) ds`.
//!
//! These are test oracles. They need the closed-form cumulant or its
//! inverse and are not estimators for general problems.

use rand::RngCore;

use crate::error::{capability, usage, Result};
use crate::logspace::{ln_abs_diff_exp, ln_add_exp, ln_one_minus_exp, LogAccumulator, LogValue};
use crate::model::TargetProblem;
use crate::stats::ks_uniform;
use crate::weights::WeightFunction;

const MIN_GRID: usize = 100;
/// Tail bounds must fall below this fraction of the running estimate.
const TAIL_FRACTION: f64 = 1e-15;

fn check_grid(grid_size: usize) -> Result<()> {
    if grid_size < MIN_GRID {
        return usage(format!(
            "grid size must be at least {MIN_GRID}, got {grid_size}"
        ));
    }
    Ok(())
}

/// `ln ∫₀^sup Z(y) dy`.
///
/// With `y = sup·e^{-t}` and `t = e^v` the integrand decays at both ends
/// of the `v` line, so a uniform trapezoid in `v` converges quickly. The
/// span is widened until both neglected tails are negligible; each tail is
/// still added through a one-sided bound.
pub fn cumulant_quadrature_y(problem: &dyn TargetProblem, grid_size: usize) -> Result<LogValue> {
    check_grid(grid_size)?;
    let log_sup = problem.log_likelihood_supremum();
    if !log_sup.is_finite() {
        return capability("ordinate quadrature needs a finite likelihood supremum");
    }
    problem.log_upper_cumulant(log_sup - 1.0)?;

    let ln_tail = TAIL_FRACTION.ln();
    let (mut t_lo, mut t_hi) = (1e-12f64, 64.0f64);
    let mut estimate = f64::NEG_INFINITY;
    for _ in 0..64 {
        let (body, lower, upper) = y_trapezoid(problem, log_sup, t_lo, t_hi, grid_size)?;
        estimate = ln_add_exp(ln_add_exp(body, lower), upper);
        let mut widened = false;
        if upper > estimate + ln_tail && t_hi < 1e6 {
            t_hi *= 2.0;
            widened = true;
        }
        if lower > estimate + ln_tail && t_lo > 1e-250 {
            t_lo *= 1e-4;
            widened = true;
        }
        if !widened {
            break;
        }
    }
    Ok(LogValue::from_ln(estimate + log_sup))
}

/// Returns `(body, lower tail, upper tail)`, all relative to `sup`.
fn y_trapezoid(
    problem: &dyn TargetProblem,
    log_sup: f64,
    t_lo: f64,
    t_hi: f64,
    n: usize,
) -> Result<(f64, f64, f64)> {
    let (v_lo, v_hi) = (t_lo.ln(), t_hi.ln());
    let h = (v_hi - v_lo) / (n - 1) as f64;
    let mut acc = LogAccumulator::default();
    let mut ln_z_lo = 0.0;
    let mut ln_z_hi = 0.0;
    for k in 0..n {
        let v = v_lo + k as f64 * h;
        let t = v.exp();
        let ln_z = problem.log_upper_cumulant(log_sup - t)?;
        if k == 0 {
            ln_z_lo = ln_z;
        }
        if k == n - 1 {
            ln_z_hi = ln_z;
        }
        let end = if k == 0 || k == n - 1 {
            -std::f64::consts::LN_2
        } else {
            0.0
        };
        acc.push(ln_z - t + v + end);
    }
    let body = acc.ln() + h.ln();
    // Z is increasing in t: bounded by Z(t_lo) below the grid, by 1 above
    let lower = ln_z_lo + ln_one_minus_exp(-t_lo);
    let upper = ln_z_hi - t_hi;
    Ok((body, lower, upper))
}

/// `ln ∫₀¹ Λ(s) ds` by the trapezoid rule on a geometric grid in `s`.
///
/// The grid runs from `s_min` to 1 with `s_min = min(1e-16, Ẑ/100)`,
/// found from a first pass; the cell `[0, s_min]` contributes
/// `s_min·Λ(s_min)`.
pub fn cumulant_quadrature_s(problem: &dyn TargetProblem, grid_size: usize) -> Result<LogValue> {
    check_grid(grid_size)?;
    let first = s_trapezoid(1e-16f64.ln(), grid_size, |ln_s| {
        problem.log_inverse_cumulant(ln_s)
    })?;
    let ln_s_min = (1e-16f64.ln()).min(first - 100f64.ln()).max(-690.0);
    if ln_s_min < 1e-16f64.ln() {
        return s_trapezoid(ln_s_min, grid_size, |ln_s| {
            problem.log_inverse_cumulant(ln_s)
        })
        .map(LogValue::from_ln);
    }
    Ok(LogValue::from_ln(first))
}

/// `ln ∫₀¹ W(Λ(s)) ds = ln ∫ W(L) dP`, the normalizer of the weighted
/// target.
pub fn weighted_evidence_quadrature(
    problem: &dyn TargetProblem,
    weight: &WeightFunction,
    grid_size: usize,
) -> Result<LogValue> {
    check_grid(grid_size)?;
    let ln = s_trapezoid(-690.0, grid_size, |ln_s| {
        weight.log_cumulative(problem.log_inverse_cumulant(ln_s)?)
    })?;
    Ok(LogValue::from_ln(ln))
}

fn s_trapezoid<F>(ln_s_min: f64, n: usize, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let h = -ln_s_min / (n - 1) as f64;
    let ln_width_factor = ln_one_minus_exp(-h);
    let mut acc = LogAccumulator::default();
    let mut prev = f(ln_s_min)?;
    acc.push(prev + ln_s_min);
    for k in 1..n {
        let ln_s = if k == n - 1 {
            0.0
        } else {
            ln_s_min + k as f64 * h
        };
        let cur = f(ln_s)?;
        let mid = ln_add_exp(prev, cur) - std::f64::consts::LN_2;
        acc.push(mid + ln_s + ln_width_factor);
        prev = cur;
    }
    Ok(acc.ln())
}

/// `ln(W(0) + ∫ Z(u) dW(u)) = ln ∫ W(L) dP` as a Stieltjes trapezoid on
/// the ordinate axis.
pub fn weighted_cumulant_quadrature_u(
    problem: &dyn TargetProblem,
    weight: &WeightFunction,
    grid_size: usize,
) -> Result<LogValue> {
    check_grid(grid_size)?;
    let log_sup = problem.log_likelihood_supremum();
    if !log_sup.is_finite() {
        return capability("ordinate quadrature needs a finite likelihood supremum");
    }
    let (v_lo, v_hi) = (1e-14f64.ln(), 1e3f64.ln());
    let h = (v_hi - v_lo) / (grid_size - 1) as f64;
    // ascending ordinates: 0, then t from t_hi down to t_lo, then sup
    let mut log_ys = vec![f64::NEG_INFINITY];
    log_ys.extend(
        (0..grid_size)
            .rev()
            .map(|k| log_sup - (v_lo + k as f64 * h).exp()),
    );
    log_ys.push(log_sup);

    let mut acc = LogAccumulator::default();
    let mut prev_w = weight.log_cumulative(f64::NEG_INFINITY)?;
    acc.push(prev_w);
    let mut prev_z = 0.0;
    for &ly in &log_ys[1..] {
        let w = weight.log_cumulative(ly)?;
        let z = problem.log_upper_cumulant(ly)?;
        if w > prev_w {
            let dz = ln_add_exp(prev_z, z) - std::f64::consts::LN_2;
            acc.push(dz + ln_abs_diff_exp(w, prev_w));
        }
        prev_w = w;
        prev_z = z;
    }
    Ok(LogValue::from_ln(acc.ln()))
}

/// Outcome of the `Z(L(X)) ~ U(0, 1)` check.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformLawReport {
    pub ks_statistic: f64,
    pub n: usize,
    /// Tied values were seen, so `Z(L(X))` has an atom and the uniform law
    /// cannot hold.
    pub atom: bool,
}

/// Draw `n` prior points and compare `Z(L(X))` with Uniform(0, 1).
pub fn uniform_law_check(
    problem: &dyn TargetProblem,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<UniformLawReport> {
    if n < 1000 {
        return usage(format!("uniform law check needs n >= 1000, got {n}"));
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let x = problem.sample_prior(rng);
        values.push(
            problem
                .log_upper_cumulant(problem.log_likelihood(&x))?
                .exp(),
        );
    }
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let atom = sorted.windows(2).any(|w| w[0] == w[1]);
    Ok(UniformLawReport {
        ks_statistic: ks_uniform(&values)?,
        n,
        atom,
    })
}
