//! Benchmark problems with closed-form cumulants and exact constrained
//! samplers, plus the discrete energy toy.

mod constant;
mod energy;
mod mvt;
mod normexp;

pub use constant::ConstantLikelihood;
pub use energy::DiscreteEnergyModel;
pub use mvt::{mvt_true_log_evidence, MultivariateTNormal};
pub use normexp::NormalExponential;

use crate::logspace::LN_MIN_CUMULANT;

/// Clamp a log cumulant so empty slices stay finite.
pub(crate) fn clamp_ln_cumulant(ln_s: f64) -> f64 {
    if ln_s.is_nan() {
        LN_MIN_CUMULANT
    } else {
        ln_s.clamp(LN_MIN_CUMULANT, 0.0)
    }
}
