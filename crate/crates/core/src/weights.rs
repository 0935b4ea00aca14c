//! Weight functions on the auxiliary slice ordinate.
//!
//! A weight `w(u)` with cumulative `W(u) = ∫₀ᵘ w` turns the slice joint
//! `w(u)·I{u < L(x)}·p(x)` into a sampler whose `x`-marginal is
//! `p(x)W(L(x))/Z_w`. Reweighting each draw by `1/W(L(x))` then recovers
//! the evidence. Everything here is on the log scale: ordinates `u` are
//! passed as `ln u`, and `u = 0` is `-inf`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::Open01;

use crate::error::{usage, Result, VlmcError};
use crate::logspace::{ln_abs_diff_exp, ln_add_exp, LN_MIN_CUMULANT};
use crate::model::TargetProblem;

const BISECTION_TOLERANCE: f64 = 1e-10;
const BISECTION_MAX_ITER: usize = 200;

/// The weight family and its parameters.
#[derive(Clone)]
pub enum WeightKind {
    /// `w = 1`, `W(u) = u`. Reduces to the harmonic mean.
    Uniform,
    /// `W(u) = u^a`, `0 < a ≤ 1`. Reweights towards the power posterior.
    Power { exponent: f64 },
    /// `W(u) = 1/max(η, Z(u))`, with an atom of mass 1 at `u = 0`.
    TruncatedInverseCumulant { eta: f64 },
    /// `W(u) = 1/(max(Z(γ), Z(u))·(-ln Z(γ)))`: the weight whose ordinate
    /// law mimics nested sampling run for `n` steps with `K` live points.
    NestedLog { log_cap: f64, ln_cap_mass: f64 },
    /// `W(u) = c + (1 - c)·W*(u)`: an atom of mass `c` at zero mixed with
    /// an inner weight.
    PointMassMixture {
        atom: f64,
        inner: Box<WeightFunction>,
    },
}

/// A one-dimensional weight on slice ordinates.
#[derive(Clone)]
pub struct WeightFunction {
    kind: WeightKind,
    problem: Option<Arc<dyn TargetProblem>>,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl WeightFunction {
    pub fn uniform() -> Self {
        WeightFunction {
            kind: WeightKind::Uniform,
            problem: None,
        }
    }

    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent <= 1.0) {
            return usage(format!(
                "power weight exponent must lie in (0, 1], got {exponent}"
            ));
        }
        Ok(WeightFunction {
            kind: WeightKind::Power { exponent },
            problem: None,
        })
    }

    /// The default weight `1/max(η, Z(u))`.
    pub fn truncated_inverse_cumulant(problem: Arc<dyn TargetProblem>, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return usage(format!("eta must lie in (0, 1], got {eta}"));
        }
        let probe = problem.log_likelihood_supremum().min(0.0) - 1.0;
        problem.log_upper_cumulant(probe)?;
        Ok(WeightFunction {
            kind: WeightKind::TruncatedInverseCumulant { eta },
            problem: Some(problem),
        })
    }

    /// Nested-sampling weight capped at ordinate `γ = e^log_cap`, checked
    /// against the intended run length: `ln Z(γ)` must lie within a factor
    /// two of `-n/K`.
    pub fn nested_log(
        problem: Arc<dyn TargetProblem>,
        log_cap: f64,
        n: usize,
        k: usize,
    ) -> Result<Self> {
        if n == 0 || k == 0 {
            return usage("nested weight needs n >= 1 and K >= 1");
        }
        let ln_cap_mass = problem.log_upper_cumulant(log_cap)?;
        if ln_cap_mass >= 0.0 {
            return usage(format!(
                "nested weight needs Z(gamma) < 1, got {}",
                ln_cap_mass.exp()
            ));
        }
        let target = -(n as f64) / k as f64;
        if !(ln_cap_mass >= 2.0 * target && ln_cap_mass <= 0.5 * target) {
            return usage(format!(
                "nested weight cap has ln Z(gamma) = {ln_cap_mass}, expected about -n/K = {target}"
            ));
        }
        Ok(WeightFunction {
            kind: WeightKind::NestedLog {
                log_cap,
                ln_cap_mass,
            },
            problem: Some(problem),
        })
    }

    /// Nested-sampling weight with `γ = Λ(e^{-n/K})`.
    pub fn nested_log_for_run(problem: Arc<dyn TargetProblem>, n: usize, k: usize) -> Result<Self> {
        if n == 0 || k == 0 {
            return usage("nested weight needs n >= 1 and K >= 1");
        }
        let log_cap = problem.log_inverse_cumulant(-(n as f64) / k as f64)?;
        Self::nested_log(problem, log_cap, n, k)
    }

    pub fn point_mass_mixture(atom: f64, inner: WeightFunction) -> Result<Self> {
        if !(atom > 0.0 && atom < 1.0) {
            return usage(format!("mixture atom must lie in (0, 1), got {atom}"));
        }
        Ok(WeightFunction {
            problem: inner.problem.clone(),
            kind: WeightKind::PointMassMixture {
                atom,
                inner: Box::new(inner),
            },
        })
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn label(&self) -> String {
        match &self.kind {
            WeightKind::Uniform => "uniform".into(),
            WeightKind::Power { exponent } => format!("power({exponent})"),
            WeightKind::TruncatedInverseCumulant { eta } => format!("default(eta={eta:e})"),
            WeightKind::NestedLog { ln_cap_mass, .. } => {
                format!("nested_log(lnZ(gamma)={ln_cap_mass:.4})")
            }
            WeightKind::PointMassMixture { atom, inner } => {
                format!("mixture({atom}, {})", inner.label())
            }
        }
    }

    fn problem(&self) -> &dyn TargetProblem {
        self.problem
            .as_deref()
            .expect("cumulant-based weights carry their problem")
    }

    /// `ln Z(u)`, with ordinates at or above the supremum treated as an
    /// empty slice.
    fn ln_cumulant(&self, log_u: f64) -> Result<f64> {
        let p = self.problem();
        if log_u >= p.log_likelihood_supremum() {
            return Ok(LN_MIN_CUMULANT);
        }
        p.log_upper_cumulant(log_u)
    }

    /// `ln W(u)`.
    pub fn log_cumulative(&self, log_u: f64) -> Result<f64> {
        Ok(match &self.kind {
            WeightKind::Uniform => log_u,
            WeightKind::Power { exponent } => {
                if log_u == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    exponent * log_u
                }
            }
            WeightKind::TruncatedInverseCumulant { eta } => -eta.ln().max(self.ln_cumulant(log_u)?),
            WeightKind::NestedLog { ln_cap_mass, .. } => {
                -ln_cap_mass.max(self.ln_cumulant(log_u)?) - (-ln_cap_mass).ln()
            }
            WeightKind::PointMassMixture { atom, inner } => {
                ln_add_exp(atom.ln(), (-atom).ln_1p() + inner.log_cumulative(log_u)?)
            }
        })
    }

    /// `ln w(u)` for `u > 0`, the density of the continuous part.
    pub fn log_density(&self, log_u: f64) -> Result<f64> {
        Ok(match &self.kind {
            WeightKind::Uniform => 0.0,
            WeightKind::Power { exponent } => exponent.ln() + (exponent - 1.0) * log_u,
            WeightKind::TruncatedInverseCumulant { eta } => {
                let ln_z = self.ln_cumulant(log_u)?;
                if ln_z > eta.ln() {
                    self.problem().log_neg_cumulant_derivative(log_u)? - 2.0 * ln_z
                } else {
                    f64::NEG_INFINITY
                }
            }
            WeightKind::NestedLog { ln_cap_mass, .. } => {
                let ln_z = self.ln_cumulant(log_u)?;
                if ln_z > *ln_cap_mass {
                    self.problem().log_neg_cumulant_derivative(log_u)?
                        - 2.0 * ln_z
                        - (-ln_cap_mass).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            WeightKind::PointMassMixture { atom, inner } => {
                (-atom).ln_1p() + inner.log_density(log_u)?
            }
        })
    }

    /// Draw `ln u` from `w(u)·I{0 ≤ u ≤ y}/W(y)` given `ln y`.
    pub fn sample_log_u(&self, rng: &mut dyn RngCore, log_y: f64) -> Result<f64> {
        let v: f64 = rng.sample(Open01);
        match &self.kind {
            WeightKind::Uniform => Ok(log_y + v.ln()),
            WeightKind::Power { exponent } => Ok(log_y + v.ln() / exponent),
            WeightKind::TruncatedInverseCumulant { eta } => {
                self.sample_inverse_cumulant_weight(v, eta.ln(), log_y)
            }
            WeightKind::NestedLog { ln_cap_mass, .. } => {
                self.sample_inverse_cumulant_weight(v, *ln_cap_mass, log_y)
            }
            WeightKind::PointMassMixture { atom, inner } => {
                let ln_p_atom = atom.ln() - self.log_cumulative(log_y)?;
                if v.ln() < ln_p_atom {
                    Ok(f64::NEG_INFINITY)
                } else {
                    inner.sample_log_u(rng, log_y)
                }
            }
        }
    }

    /// `T ~ U(0, 1/max(η, Z(y)))`; `u = 0` if `T ≤ 1`, else `u = Z⁻¹(1/T)`.
    fn sample_inverse_cumulant_weight(&self, v: f64, ln_floor: f64, log_y: f64) -> Result<f64> {
        let ln_t = v.ln() - ln_floor.max(self.ln_cumulant(log_y)?);
        if ln_t <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.inverse_cumulant(-ln_t, log_y)?.min(log_y))
    }

    /// `ln Λ(s)`, by the problem's closed form or else by bisection on
    /// `(-inf, upper]`.
    fn inverse_cumulant(&self, ln_s: f64, upper: f64) -> Result<f64> {
        let p = self.problem();
        match p.log_inverse_cumulant(ln_s) {
            Err(VlmcError::Capability(_)) => bisect_inverse_cumulant(p, ln_s, upper),
            other => other,
        }
    }

    /// `-ln W(y)`: the log importance weight of a draw with `ln L = log_y`.
    pub fn importance_log_weight(&self, log_y: f64) -> Result<f64> {
        let lw = self.log_cumulative(log_y)?;
        if lw == f64::NEG_INFINITY || lw.is_nan() {
            return Err(VlmcError::UnreachableSample {
                log_likelihood: log_y,
            });
        }
        Ok(-lw)
    }

    /// Ordinate CDF implied by the nested weight, `ln Z(y)/ln Z(γ)`.
    pub fn nested_ordinate_cdf(&self, log_y: f64) -> Result<f64> {
        match &self.kind {
            WeightKind::NestedLog {
                log_cap,
                ln_cap_mass,
            } => {
                if log_y >= *log_cap {
                    return Ok(1.0);
                }
                if log_y == f64::NEG_INFINITY {
                    return Ok(0.0);
                }
                Ok(self.ln_cumulant(log_y)? / ln_cap_mass)
            }
            _ => usage("ordinate CDF is defined for the nested weight only"),
        }
    }

    /// Quantile of [`Self::nested_ordinate_cdf`]: `Z(y_q) = Z(γ)^q`.
    pub fn nested_ordinate_quantile(&self, q: f64) -> Result<f64> {
        match &self.kind {
            WeightKind::NestedLog {
                log_cap,
                ln_cap_mass,
            } => {
                if !(0.0..=1.0).contains(&q) {
                    return usage(format!("quantile level must lie in [0, 1], got {q}"));
                }
                if q == 1.0 {
                    return Ok(*log_cap);
                }
                self.inverse_cumulant(q * ln_cap_mass, *log_cap)
            }
            _ => usage("ordinate quantile is defined for the nested weight only"),
        }
    }
}

/// Solve `ln Z(y) = ln_s` for `ln y` by bisection.
pub fn bisect_inverse_cumulant(problem: &dyn TargetProblem, ln_s: f64, upper: f64) -> Result<f64> {
    if ln_s >= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let mut hi = upper.min(problem.log_likelihood_supremum());
    if problem.log_upper_cumulant(hi)? >= ln_s {
        return Ok(hi);
    }
    let mut step = 1.0;
    let mut lo = hi - step;
    while problem.log_upper_cumulant(lo)? < ln_s {
        hi = lo;
        step *= 2.0;
        lo -= step;
        if !lo.is_finite() {
            return Err(VlmcError::Numeric(
                "bisection could not bracket the ordinate".into(),
            ));
        }
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if problem.log_upper_cumulant(mid)? >= ln_s {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECTION_TOLERANCE * mid.abs().max(1.0) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(VlmcError::Numeric(format!(
        "bisection for ln s = {ln_s} did not converge in {BISECTION_MAX_ITER} iterations"
    )))
}

/// Probability that `u ≤ e^log_u` given the likelihood `e^log_y`, i.e.
/// `W(u)/W(y)`, on the log scale.
pub fn conditional_log_cdf(weight: &WeightFunction, log_u: f64, log_y: f64) -> Result<f64> {
    Ok(weight.log_cumulative(log_u.min(log_y))? - weight.log_cumulative(log_y)?)
}

/// `(W(u) - W(0))/(W(y) - W(0))`: the CDF of the continuous part.
pub fn continuous_part_cdf(weight: &WeightFunction, log_u: f64, log_y: f64) -> Result<f64> {
    let w0 = weight.log_cumulative(f64::NEG_INFINITY)?;
    let num = ln_abs_diff_exp(weight.log_cumulative(log_u.min(log_y))?, w0);
    let den = ln_abs_diff_exp(weight.log_cumulative(log_y)?, w0);
    Ok((num - den).exp().min(1.0))
}
