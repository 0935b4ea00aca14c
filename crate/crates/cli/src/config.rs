use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use vlmc::problems::{ConstantLikelihood, MultivariateTNormal, NormalExponential};
use vlmc::samplers::NestedOptions;
use vlmc::{TargetProblem, WeightFunction};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 20150601;
pub const DEFAULT_REPETITIONS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Mvt {
        #[serde(default = "default_nu")]
        nu: f64,
        #[serde(default = "default_mvt_tau")]
        tau: f64,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    Normexp {
        #[serde(default = "default_datum")]
        datum: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default = "default_normexp_tau")]
        tau: f64,
    },
    Constant {
        log_c: f64,
    },
}

fn default_nu() -> f64 {
    MultivariateTNormal::DEFAULT_NU
}
fn default_mvt_tau() -> f64 {
    MultivariateTNormal::DEFAULT_TAU
}
fn default_dim() -> usize {
    MultivariateTNormal::DEFAULT_DIM
}
fn default_datum() -> f64 {
    NormalExponential::DEFAULT_DATUM
}
fn default_sigma() -> f64 {
    NormalExponential::DEFAULT_SIGMA
}
fn default_normexp_tau() -> f64 {
    NormalExponential::DEFAULT_TAU
}

impl ProblemSpec {
    pub fn build(&self) -> CliResult<Arc<dyn TargetProblem>> {
        Ok(match *self {
            ProblemSpec::Mvt { nu, tau, dim } => Arc::new(MultivariateTNormal::new(nu, tau, dim)?),
            ProblemSpec::Normexp { datum, sigma, tau } => {
                Arc::new(NormalExponential::new(datum, sigma, tau)?)
            }
            ProblemSpec::Constant { log_c } => Arc::new(ConstantLikelihood::new(log_c)?),
        })
    }

    /// `η` used by the default weight when the config leaves it out.
    pub fn default_eta(&self) -> f64 {
        match self {
            ProblemSpec::Mvt { .. } => MultivariateTNormal::DEFAULT_ETA,
            ProblemSpec::Normexp { .. } => NormalExponential::DEFAULT_ETA,
            ProblemSpec::Constant { .. } => 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Uniform,
    Power {
        exponent: f64,
    },
    /// `1/max(η, Z(u))`.
    Default {
        #[serde(default)]
        eta: Option<f64>,
    },
    NestedLog {
        live_points: usize,
        iterations: usize,
        /// `Z(γ)`; defaults to `e^{-n/K}`.
        #[serde(default)]
        cap_mass: Option<f64>,
    },
    Mixture {
        atom: f64,
        inner: Box<WeightSpec>,
    },
}

impl WeightSpec {
    pub fn build(
        &self,
        problem: &Arc<dyn TargetProblem>,
        default_eta: f64,
    ) -> CliResult<WeightFunction> {
        Ok(match self {
            WeightSpec::Uniform => WeightFunction::uniform(),
            WeightSpec::Power { exponent } => WeightFunction::power(*exponent)?,
            WeightSpec::Default { eta } => WeightFunction::truncated_inverse_cumulant(
                problem.clone(),
                eta.unwrap_or(default_eta),
            )?,
            WeightSpec::NestedLog {
                live_points,
                iterations,
                cap_mass,
            } => match cap_mass {
                None => {
                    WeightFunction::nested_log_for_run(problem.clone(), *iterations, *live_points)?
                }
                Some(m) => {
                    if !(*m > 0.0 && *m < 1.0) {
                        return Err(CliError::Config(format!(
                            "cap_mass must lie in (0, 1), got {m}"
                        )));
                    }
                    let log_cap = problem.log_inverse_cumulant(m.ln())?;
                    WeightFunction::nested_log(problem.clone(), log_cap, *iterations, *live_points)?
                }
            },
            WeightSpec::Mixture { atom, inner } => {
                WeightFunction::point_mass_mixture(*atom, inner.build(problem, default_eta)?)?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    PriorMc,
    Harmonic,
    WeightedSlice {
        weight: WeightSpec,
    },
    Nested {
        live_points: usize,
        iterations: usize,
        #[serde(default)]
        remainder: bool,
    },
}

impl MethodSpec {
    pub fn nested_options(&self) -> Option<NestedOptions> {
        match *self {
            MethodSpec::Nested {
                live_points,
                iterations,
                remainder,
            } => Some(NestedOptions {
                live_points,
                iterations,
                remainder,
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub methods: Vec<MethodSpec>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Retained draws per run; burn-in comes on top. Zero is accepted only
    /// by the histogram export.
    pub samples: usize,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_thin")]
    pub thin: usize,
    #[serde(default = "default_mcmc_steps")]
    pub mcmc_steps: usize,
}

fn default_repetitions() -> usize {
    DEFAULT_REPETITIONS
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_bins() -> usize {
    50
}
fn default_thin() -> usize {
    1
}
fn default_mcmc_steps() -> usize {
    20
}

/// A method with its weight already constructed.
#[derive(Debug, Clone)]
pub struct PreparedMethod {
    pub spec: MethodSpec,
    pub weight: Option<WeightFunction>,
    pub label: String,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Check every field and build every weight, so that a bad config
    /// fails before any sampling starts.
    pub fn prepare(&self) -> CliResult<(Arc<dyn TargetProblem>, Vec<PreparedMethod>)> {
        if self.repetitions == 0 {
            return Err(CliError::Config("repetitions must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(CliError::Config("no methods listed".into()));
        }
        if self.bins == 0 || self.thin == 0 || self.mcmc_steps == 0 {
            return Err(CliError::Config(
                "bins, thin and mcmc_steps must be positive".into(),
            ));
        }
        let problem = self.problem.build()?;
        let eta = self.problem.default_eta();
        let mut prepared = Vec::with_capacity(self.methods.len());
        for spec in &self.methods {
            let (weight, label) = match spec {
                MethodSpec::PriorMc => (None, "prior_mc".to_string()),
                MethodSpec::Harmonic => (None, "harmonic".to_string()),
                MethodSpec::WeightedSlice { weight } => {
                    let w = weight.build(&problem, eta)?;
                    let label = format!("weighted_slice[{}]", w.label());
                    (Some(w), label)
                }
                MethodSpec::Nested {
                    live_points,
                    iterations,
                    ..
                } => {
                    spec.nested_options().expect("nested").validate()?;
                    (None, format!("nested(K={live_points},n={iterations})"))
                }
            };
            prepared.push(PreparedMethod {
                spec: spec.clone(),
                weight,
                label,
            });
        }
        Ok((problem, prepared))
    }
}
