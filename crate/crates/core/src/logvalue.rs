//! Nonnegative reals carried as natural logarithms.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul};

use crate::numeric::sum::log_add_exp;

/// A nonnegative real stored as `ln` of its magnitude.
///
/// Zero is an explicit flag rather than `-inf`, so a zero survives
/// multiplication and comparisons without NaN traps.
#[derive(Clone, Copy, PartialEq)]
pub struct LogValue {
    log_magnitude: f64,
    is_zero: bool,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        log_magnitude: f64::NEG_INFINITY,
        is_zero: true,
    };
    pub const ONE: LogValue = LogValue {
        log_magnitude: 0.0,
        is_zero: false,
    };

    /// Wraps a natural logarithm. `-inf` maps to zero.
    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogValue {
                log_magnitude: ln,
                is_zero: false,
            }
        }
    }

    /// From a nonnegative real.
    pub fn from_value(x: f64) -> Self {
        debug_assert!(x >= 0.0, "LogValue holds nonnegative reals");
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::from_ln(x.ln())
        }
    }

    pub fn ln(&self) -> f64 {
        if self.is_zero {
            f64::NEG_INFINITY
        } else {
            self.log_magnitude
        }
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }

    /// The plain value; underflows to 0 below ~1e-308.
    pub fn value(&self) -> f64 {
        if self.is_zero {
            0.0
        } else {
            self.log_magnitude.exp()
        }
    }

    /// `x^p`
    pub fn powf(self, p: f64) -> LogValue {
        if self.is_zero {
            return if p == 0.0 { Self::ONE } else { Self::ZERO };
        }
        LogValue::from_ln(self.log_magnitude * p)
    }

    /// `|self/other − 1|` computed as `|expm1(ln self − ln other)|`.
    pub fn relative_error_to(&self, reference: &LogValue) -> f64 {
        relative_error_ln(self.ln(), reference.ln())
    }
}

/// `|exp(est − exact) − 1|`
pub fn relative_error_ln(estimate_ln: f64, exact_ln: f64) -> f64 {
    (estimate_ln - exact_ln).exp_m1().abs()
}

/// Sum by log-sum-exp.
impl Add for LogValue {
    type Output = LogValue;
    fn add(self, rhs: LogValue) -> LogValue {
        match (self.is_zero, rhs.is_zero) {
            (true, _) => rhs,
            (_, true) => self,
            _ => LogValue::from_ln(log_add_exp(self.log_magnitude, rhs.log_magnitude)),
        }
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        if self.is_zero || rhs.is_zero {
            LogValue::ZERO
        } else {
            LogValue::from_ln(self.log_magnitude + rhs.log_magnitude)
        }
    }
}

impl Div for LogValue {
    type Output = LogValue;
    fn div(self, rhs: LogValue) -> LogValue {
        assert!(!rhs.is_zero, "LogValue division by zero");
        if self.is_zero {
            LogValue::ZERO
        } else {
            LogValue::from_ln(self.log_magnitude - rhs.log_magnitude)
        }
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.ln().partial_cmp(&other.ln())
    }
}

impl fmt::Debug for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero {
            write!(f, "LogValue(0)")
        } else {
            write!(f, "LogValue(exp({}))", self.log_magnitude)
        }
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero {
            return write!(f, "0");
        }
        // mantissa × 10^exp without leaving log space
        let log10 = self.log_magnitude / std::f64::consts::LN_10;
        let exp = log10.floor();
        let mantissa = 10f64.powf(log10 - exp);
        write!(f, "{mantissa:.12}e{exp}")
    }
}
