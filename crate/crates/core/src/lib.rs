//! Vertical-likelihood Monte Carlo for normalizing constants.
//!
//! The evidence `Z = ∫ L dP` is rewritten as a one-dimensional integral over
//! likelihood ordinates. Weighted slice sampling, nested sampling, the
//! harmonic mean and energy-level samplers are all driven by a choice of
//! weight on the auxiliary ordinate; see [`weights::WeightFunction`].

pub mod error;
pub mod logspace;
pub mod model;
pub mod problems;
pub mod quadrature;
pub mod samplers;
pub mod special;
pub mod stats;
pub mod weights;

pub use error::{Result, VlmcError};
pub use logspace::{log_sum_exp, LogValue};
pub use model::{EvidenceEstimate, Method, OrdinateTrace, Point, TargetProblem};
pub use weights::WeightFunction;
