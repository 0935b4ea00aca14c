use rand::{Rng, RngCore};

use crate::error::{domain, usage, Result};
use crate::logspace::LN_MIN_CUMULANT;
use crate::model::{Point, TargetProblem};

/// `L ≡ c` under a Uniform(0, 1) prior. Every estimator should return
/// `ln c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantLikelihood {
    log_c: f64,
}

impl ConstantLikelihood {
    pub fn new(log_c: f64) -> Result<Self> {
        if !log_c.is_finite() {
            return usage(format!("log of the constant must be finite, got {log_c}"));
        }
        Ok(ConstantLikelihood { log_c })
    }
}

impl TargetProblem for ConstantLikelihood {
    fn dim(&self) -> usize {
        1
    }

    fn log_likelihood(&self, _x: &Point) -> f64 {
        self.log_c
    }

    fn sample_prior(&self, rng: &mut dyn RngCore) -> Point {
        Point::scalar(rng.random())
    }

    fn log_prior_density(&self, x: &Point) -> f64 {
        let v = x.coords()[0];
        if (0.0..=1.0).contains(&v) {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    fn log_likelihood_supremum(&self) -> f64 {
        self.log_c
    }

    fn log_upper_cumulant(&self, log_y: f64) -> Result<f64> {
        if log_y.is_nan() {
            return domain("ordinate is NaN");
        }
        Ok(if log_y < self.log_c {
            0.0
        } else {
            LN_MIN_CUMULANT
        })
    }

    fn log_inverse_cumulant(&self, log_s: f64) -> Result<f64> {
        if log_s.is_nan() || log_s > 0.0 {
            return domain(format!(
                "cumulant probability must lie in (0, 1], got ln s = {log_s}"
            ));
        }
        Ok(self.log_c)
    }

    fn constrained_prior_sample(&self, rng: &mut dyn RngCore, log_y: f64) -> Result<Point> {
        if log_y < self.log_c {
            Ok(self.sample_prior(rng))
        } else {
            domain("slice above a constant likelihood is empty")
        }
    }

    fn has_exact_constrained_sampler(&self) -> bool {
        true
    }

    fn true_log_evidence(&self) -> Result<f64> {
        Ok(self.log_c)
    }

    fn name(&self) -> String {
        format!("constant(log_c={})", self.log_c)
    }
}
