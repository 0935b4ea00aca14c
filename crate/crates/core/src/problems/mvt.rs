use rand::{Rng, RngCore};
use rand_distr::{Open01, StandardNormal};

use super::clamp_ln_cumulant;
use crate::error::{domain, usage, Result};
use crate::model::{Point, TargetProblem};
use crate::special::{
    gamma_quantile_ln, kummer_u, ln_gamma_density, ln_regularized_gamma, QuadratureSpec, Tail,
};

/// Multivariate-t likelihood `(1 + xᵀx/ν)^{-(ν+d)/2}` against a
/// `N(0, I/τ)` prior. Slices are centred balls.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateTNormal {
    nu: f64,
    tau: f64,
    dim: usize,
}

impl MultivariateTNormal {
    pub const DEFAULT_NU: f64 = 2.0;
    pub const DEFAULT_TAU: f64 = 1.0;
    pub const DEFAULT_DIM: usize = 50;
    pub const DEFAULT_ETA: f64 = 1e-14;

    pub fn new(nu: f64, tau: f64, dim: usize) -> Result<Self> {
        if !(nu > 0.0) || !(tau > 0.0) || !nu.is_finite() || !tau.is_finite() {
            return usage(format!("nu and tau must be positive (nu={nu}, tau={tau})"));
        }
        if dim == 0 {
            return usage("dimension must be at least 1");
        }
        Ok(MultivariateTNormal { nu, tau, dim })
    }

    fn exponent(&self) -> f64 {
        0.5 * (self.nu + self.dim as f64)
    }

    fn shape(&self) -> f64 {
        0.5 * self.dim as f64
    }

    /// Squared radius of the slice `{L > e^log_y}`.
    pub fn radius_sq(&self, log_y: f64) -> Result<f64> {
        if log_y.is_nan() || log_y > 0.0 {
            return domain(format!("ordinate must lie in (0, 1], got ln y = {log_y}"));
        }
        Ok(self.nu * (-log_y / self.exponent()).exp_m1())
    }

    fn log_ordinate_at_radius_sq(&self, r2: f64) -> f64 {
        -self.exponent() * (r2 / self.nu).ln_1p()
    }
}

impl Default for MultivariateTNormal {
    fn default() -> Self {
        Self::new(Self::DEFAULT_NU, Self::DEFAULT_TAU, Self::DEFAULT_DIM)
            .expect("default parameters are valid")
    }
}

/// `ln Z = a ln s + ln U(a, b, s)` with `a = (ν+d)/2`, `b = ν/2 + 1`,
/// `s = ντ/2`.
pub fn mvt_true_log_evidence(nu: f64, tau: f64, dim: usize) -> Result<f64> {
    if dim == 0 {
        return usage("dimension must be at least 1");
    }
    let p = MultivariateTNormal::new(nu, tau, dim)?;
    p.true_log_evidence()
}

impl TargetProblem for MultivariateTNormal {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_likelihood(&self, x: &Point) -> f64 {
        self.log_ordinate_at_radius_sq(x.norm_sq())
    }

    fn sample_prior(&self, rng: &mut dyn RngCore) -> Point {
        let scale = self.tau.sqrt().recip();
        Point::new(
            (0..self.dim)
                .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        )
    }

    fn log_prior_density(&self, x: &Point) -> f64 {
        0.5 * self.dim as f64 * (self.tau / (2.0 * std::f64::consts::PI)).ln()
            - 0.5 * self.tau * x.norm_sq()
    }

    fn log_likelihood_supremum(&self) -> f64 {
        0.0
    }

    fn log_upper_cumulant(&self, log_y: f64) -> Result<f64> {
        let r2 = self.radius_sq(log_y)?;
        let (ln_p, _) = ln_regularized_gamma(self.shape(), 0.5 * self.tau * r2)?;
        Ok(clamp_ln_cumulant(ln_p))
    }

    fn log_inverse_cumulant(&self, log_s: f64) -> Result<f64> {
        if log_s.is_nan() || log_s > 0.0 {
            return domain(format!(
                "cumulant probability must lie in (0, 1], got ln s = {log_s}"
            ));
        }
        if log_s == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let g = gamma_quantile_ln(self.shape(), log_s, Tail::Lower)?;
        Ok(self.log_ordinate_at_radius_sq(2.0 * g / self.tau))
    }

    fn log_neg_cumulant_derivative(&self, log_y: f64) -> Result<f64> {
        let r2 = self.radius_sq(log_y)?;
        let g = 0.5 * self.tau * r2;
        let k = self.exponent();
        // dg/dy = (τ/2) ν (1/k) y^{-1/k - 1}
        Ok(
            ln_gamma_density(self.shape(), g) + (0.5 * self.tau * self.nu / k).ln()
                - (1.0 / k + 1.0) * log_y,
        )
    }

    fn constrained_prior_sample(&self, rng: &mut dyn RngCore, log_y: f64) -> Result<Point> {
        if log_y == f64::NEG_INFINITY {
            return Ok(self.sample_prior(rng));
        }
        let r2 = self.radius_sq(log_y)?;
        if r2 == 0.0 {
            return domain("slice at the likelihood supremum is empty");
        }
        let g_max = 0.5 * self.tau * r2;
        let (ln_p_max, _) = ln_regularized_gamma(self.shape(), g_max)?;
        let v: f64 = rng.sample(Open01);
        let g = gamma_quantile_ln(self.shape(), ln_p_max + v.ln(), Tail::Lower)?.min(g_max);
        let radius = (2.0 * g / self.tau).sqrt();

        let mut dir: Vec<f64> = (0..self.dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        for c in &mut dir {
            *c *= radius / norm;
        }
        Ok(Point::new(dir))
    }

    fn has_exact_constrained_sampler(&self) -> bool {
        true
    }

    fn true_log_evidence(&self) -> Result<f64> {
        let a = self.exponent();
        let b = 0.5 * self.nu + 1.0;
        let s = 0.5 * self.nu * self.tau;
        let u = kummer_u(a, b, s, QuadratureSpec::default())?;
        Ok(a * s.ln() + u.ln())
    }

    fn name(&self) -> String {
        format!("mvt(nu={}, tau={}, d={})", self.nu, self.tau, self.dim)
    }
}
