use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp, Open01};

use super::clamp_ln_cumulant;
use crate::error::{domain, usage, Result};
use crate::logspace::ln_one_minus_exp;
use crate::model::{Point, TargetProblem};
use crate::special::ln_regularized_gamma;

/// Gaussian likelihood `N(a; x, σ²)` against an exponential prior with
/// mean `τ` on `x > 0`.
///
/// The slice `{L > y}` is the interval `(max(0, a - δ), a + δ)` with
/// `δ = σ √(2 (ln sup L - ln y))`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalExponential {
    datum: f64,
    sigma: f64,
    tau: f64,
    log_sup: f64,
}

impl NormalExponential {
    pub const DEFAULT_DATUM: f64 = 1.0;
    pub const DEFAULT_SIGMA: f64 = 5.0;
    pub const DEFAULT_TAU: f64 = 100.0;
    pub const DEFAULT_ETA: f64 = 1e-4;

    pub fn new(datum: f64, sigma: f64, tau: f64) -> Result<Self> {
        if !(datum >= 0.0) || !datum.is_finite() {
            return usage(format!("datum must be finite and nonnegative, got {datum}"));
        }
        if !(sigma > 0.0) || !(tau > 0.0) || !sigma.is_finite() || !tau.is_finite() {
            return usage(format!(
                "sigma and tau must be positive (sigma={sigma}, tau={tau})"
            ));
        }
        let log_sup = -0.5 * (2.0 * std::f64::consts::PI * sigma * sigma).ln();
        Ok(NormalExponential {
            datum,
            sigma,
            tau,
            log_sup,
        })
    }

    pub fn datum(&self) -> f64 {
        self.datum
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Half-width of the slice at ordinate `e^log_y`.
    pub fn delta(&self, log_y: f64) -> Result<f64> {
        if log_y.is_nan() || log_y > self.log_sup {
            return domain(format!(
                "ordinate ln y = {log_y} lies above the likelihood supremum {}",
                self.log_sup
            ));
        }
        Ok(self.sigma * (2.0 * (self.log_sup - log_y)).sqrt())
    }

    /// Slice endpoints `(l, r)` for half-width `delta`.
    pub fn slice_bounds(&self, delta: f64) -> (f64, f64) {
        ((self.datum - delta).max(0.0), self.datum + delta)
    }

    /// Branch point `c = 1 - e^{-2a/τ}` of the inverse cumulant.
    pub fn branch_point(&self) -> f64 {
        -(-2.0 * self.datum / self.tau).exp_m1()
    }

    /// `ln Z` as a function of the half-width.
    pub fn log_cumulant_at_delta(&self, delta: f64) -> f64 {
        let (a, tau) = (self.datum, self.tau);
        if delta == f64::INFINITY {
            return 0.0;
        }
        let raw = if delta >= a {
            (-(-(a + delta) / tau).exp_m1()).ln()
        } else {
            std::f64::consts::LN_2 - a / tau + (delta / tau).sinh().ln()
        };
        clamp_ln_cumulant(raw)
    }

    /// Half-width whose slice has prior mass `e^log_s`.
    pub fn delta_for_log_mass(&self, log_s: f64) -> f64 {
        let (a, tau) = (self.datum, self.tau);
        if log_s >= 0.0 {
            return f64::INFINITY;
        }
        if log_s.exp() >= self.branch_point() {
            (-tau * ln_one_minus_exp(log_s) - a).max(0.0)
        } else {
            tau * ((log_s + a / tau).exp() / 2.0).asinh()
        }
    }

    fn log_ordinate_at_delta(&self, delta: f64) -> f64 {
        self.log_sup - delta * delta / (2.0 * self.sigma * self.sigma)
    }
}

impl Default for NormalExponential {
    fn default() -> Self {
        Self::new(Self::DEFAULT_DATUM, Self::DEFAULT_SIGMA, Self::DEFAULT_TAU)
            .expect("default parameters are valid")
    }
}

impl TargetProblem for NormalExponential {
    fn dim(&self) -> usize {
        1
    }

    fn log_likelihood(&self, x: &Point) -> f64 {
        let r = x.coords()[0] - self.datum;
        self.log_sup - r * r / (2.0 * self.sigma * self.sigma)
    }

    fn sample_prior(&self, rng: &mut dyn RngCore) -> Point {
        let exp = Exp::new(1.0 / self.tau).expect("tau validated at construction");
        Point::scalar(exp.sample(rng))
    }

    fn log_prior_density(&self, x: &Point) -> f64 {
        let v = x.coords()[0];
        if v < 0.0 {
            f64::NEG_INFINITY
        } else {
            -self.tau.ln() - v / self.tau
        }
    }

    fn log_likelihood_supremum(&self) -> f64 {
        self.log_sup
    }

    fn log_upper_cumulant(&self, log_y: f64) -> Result<f64> {
        let delta = self.delta(log_y)?;
        Ok(self.log_cumulant_at_delta(delta))
    }

    fn log_inverse_cumulant(&self, log_s: f64) -> Result<f64> {
        if log_s.is_nan() || log_s > 0.0 {
            return domain(format!(
                "cumulant probability must lie in (0, 1], got ln s = {log_s}"
            ));
        }
        Ok(self.log_ordinate_at_delta(self.delta_for_log_mass(log_s)))
    }

    fn log_neg_cumulant_derivative(&self, log_y: f64) -> Result<f64> {
        let delta = self.delta(log_y)?;
        if delta == 0.0 {
            return Ok(f64::INFINITY);
        }
        let (a, tau) = (self.datum, self.tau);
        let ln_dz_ddelta = if delta >= a {
            -tau.ln() - (a + delta) / tau
        } else {
            std::f64::consts::LN_2 - tau.ln() - a / tau + (delta / tau).cosh().ln()
        };
        Ok(ln_dz_ddelta + 2.0 * self.sigma.ln() - log_y - delta.ln())
    }

    fn constrained_prior_sample(&self, rng: &mut dyn RngCore, log_y: f64) -> Result<Point> {
        if log_y == f64::NEG_INFINITY {
            return Ok(self.sample_prior(rng));
        }
        let delta = self.delta(log_y)?;
        if delta == 0.0 {
            return domain("slice at the likelihood supremum is empty");
        }
        let (lo, hi) = self.slice_bounds(delta);
        let v: f64 = rng.sample(Open01);
        let x = lo - self.tau * (v * (-(hi - lo) / self.tau).exp_m1()).ln_1p();
        Ok(Point::scalar(x.clamp(lo, hi)))
    }

    fn has_exact_constrained_sampler(&self) -> bool {
        true
    }

    /// Completing the square gives `τ⁻¹ e^{-a/τ + σ²/2τ²} Φ((a - σ²/τ)/σ)`.
    fn true_log_evidence(&self) -> Result<f64> {
        let (a, s, t) = (self.datum, self.sigma, self.tau);
        let z = (a - s * s / t) / s;
        Ok(-t.ln() - a / t + s * s / (2.0 * t * t) + ln_normal_cdf(z)?)
    }

    fn name(&self) -> String {
        format!(
            "normexp(a={}, sigma={}, tau={})",
            self.datum, self.sigma, self.tau
        )
    }
}

/// `ln Φ(z)` through the incomplete gamma with shape one half.
fn ln_normal_cdf(z: f64) -> Result<f64> {
    let (_, ln_q) = ln_regularized_gamma(0.5, 0.5 * z * z)?;
    let ln_half_tail = ln_q - std::f64::consts::LN_2;
    Ok(if z < 0.0 {
        ln_half_tail
    } else {
        ln_one_minus_exp(ln_half_tail)
    })
}
