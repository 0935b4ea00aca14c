//! The (likelihood, prior) abstraction and the result types shared by all
//! estimators.

use std::fmt;

use rand::RngCore;

use crate::error::{capability, Result};

/// A point in the parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty(), "points need at least one coordinate");
        Point(coords)
    }

    pub fn scalar(x: f64) -> Self {
        Point(vec![x])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }
}

/// A likelihood paired with a prior.
///
/// Ordinates (likelihood values) are always passed as natural logs, and
/// cumulant probabilities as natural logs too. Closed-form pieces are
/// optional; the defaults report a capability error.
pub trait TargetProblem: Send + Sync {
    fn dim(&self) -> usize;

    fn log_likelihood(&self, x: &Point) -> f64;

    fn sample_prior(&self, rng: &mut dyn RngCore) -> Point;

    fn log_prior_density(&self, x: &Point) -> f64;

    /// `ln sup L`, possibly `+inf`.
    fn log_likelihood_supremum(&self) -> f64;

    /// `ln Z(y)` where `Z(y) = P(L(X) > y)`, given `ln y`.
    fn log_upper_cumulant(&self, _log_y: f64) -> Result<f64> {
        capability("problem has no closed-form upper cumulant")
    }

    /// `ln Λ(s)` given `ln s`, where `Λ` is the pseudo-inverse of `Z`.
    fn log_inverse_cumulant(&self, _log_s: f64) -> Result<f64> {
        capability("problem has no closed-form inverse cumulant")
    }

    /// `ln(-Z'(y))` given `ln y`.
    fn log_neg_cumulant_derivative(&self, _log_y: f64) -> Result<f64> {
        capability("problem has no closed-form cumulant derivative")
    }

    /// A draw from the prior restricted to `{x : L(x) > y}`.
    fn constrained_prior_sample(&self, _rng: &mut dyn RngCore, _log_y: f64) -> Result<Point> {
        capability("problem has no exact constrained prior sampler")
    }

    fn has_exact_constrained_sampler(&self) -> bool {
        false
    }

    /// `ln Z` when it is known analytically.
    fn true_log_evidence(&self) -> Result<f64> {
        capability("problem has no analytic evidence")
    }

    fn name(&self) -> String;
}

/// Which estimator produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    PriorMonteCarlo,
    HarmonicMean,
    WeightedSlice,
    Nested,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::PriorMonteCarlo => "prior_mc",
            Method::HarmonicMean => "harmonic",
            Method::WeightedSlice => "weighted_slice",
            Method::Nested => "nested",
        };
        f.write_str(s)
    }
}

/// `ln Ẑ` with a standard error on the log scale.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceEstimate {
    pub log_z: f64,
    pub std_err_log: f64,
    pub n_samples: usize,
    pub method: Method,
    /// Number of likelihood evaluations the run spent.
    pub likelihood_evals: usize,
}

/// Log-likelihood ordinates visited by a run, one per recorded step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OrdinateTrace {
    pub ordinates: Vec<f64>,
    pub burn_in: usize,
    /// First coordinate of each recorded point, when requested.
    pub first_coords: Vec<f64>,
}

impl OrdinateTrace {
    pub fn retained(&self) -> &[f64] {
        &self.ordinates[self.burn_in.min(self.ordinates.len())..]
    }

    pub fn retained_coords(&self) -> &[f64] {
        &self.first_coords[self.burn_in.min(self.first_coords.len())..]
    }

    /// CSV with header `step,log_ordinate`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,log_ordinate\n");
        for (i, y) in self.ordinates.iter().enumerate() {
            out.push_str(&format!("{i},{y}\n"));
        }
        out
    }
}
