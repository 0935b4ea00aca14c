//! Arithmetic on nonnegative reals stored as natural logarithms.
//!
//! Evidence values for the benchmark problems span hundreds of orders of
//! magnitude, so every accumulation in the crate goes through these helpers.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul};

use crate::error::{usage, Result};

/// Smallest cumulant value used before taking logs.
pub const MIN_CUMULANT: f64 = 1e-300;

/// `ln(MIN_CUMULANT)`.
pub const LN_MIN_CUMULANT: f64 = -690.775_527_898_213_7;

/// A nonnegative real held as its natural log. `-inf` is zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);

    pub fn from_ln(ln: f64) -> Self {
        LogValue(ln)
    }

    /// Panics in debug builds if `value` is negative.
    pub fn from_linear(value: f64) -> Self {
        debug_assert!(value >= 0.0, "LogValue from negative {value}");
        LogValue(value.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn to_linear(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn powf(self, p: f64) -> Self {
        if self.is_zero() && p > 0.0 {
            return Self::ZERO;
        }
        LogValue(self.0 * p)
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})", self.0)
    }
}

impl Add for LogValue {
    type Output = LogValue;
    fn add(self, rhs: LogValue) -> LogValue {
        LogValue(ln_add_exp(self.0, rhs.0))
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        LogValue(self.0 + rhs.0)
    }
}

impl Div for LogValue {
    type Output = LogValue;
    fn div(self, rhs: LogValue) -> LogValue {
        LogValue(self.0 - rhs.0)
    }
}

impl std::iter::Sum for LogValue {
    fn sum<I: Iterator<Item = LogValue>>(iter: I) -> LogValue {
        let v: Vec<f64> = iter.map(|l| l.0).collect();
        if v.is_empty() {
            return LogValue::ZERO;
        }
        LogValue(lse_slice(&v))
    }
}

/// `ln(e^a + e^b)`.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    if hi == f64::INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln|e^a - e^b|`.
pub fn ln_abs_diff_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    if hi == lo {
        return f64::NEG_INFINITY;
    }
    hi + ln_one_minus_exp(lo - hi)
}

/// `ln(1 - e^x)` for `x <= 0`, accurate near both ends.
pub fn ln_one_minus_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Log-sum-exp of a nonempty sequence with the maximum factored out.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return usage("log_sum_exp of an empty sequence");
    }
    Ok(lse_slice(values))
}

fn lse_slice(values: &[f64]) -> f64 {
    let max = values
        .iter()
        .copied()
        .max_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
        .unwrap_or(f64::NEG_INFINITY);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + s.ln()
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub struct LogAccumulator {
    max: f64,
    scaled: f64,
}

impl Default for LogAccumulator {
    fn default() -> Self {
        LogAccumulator {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogAccumulator {
    pub fn push(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v > self.max {
            self.scaled = self.scaled * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.scaled += (v - self.max).exp();
        }
    }

    pub fn ln(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}
