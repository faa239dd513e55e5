//! Scalar abstraction for correctness scores and pass ratios.
//!
//! Every score in the crate is a ratio of two counts (satisfied edges over
//! constraints, passed tests over total tests), so the only operation a
//! scalar really needs beyond ordering is construction from such a ratio.
//! Floating point types give the usual behaviour; [`Rational64`] gives exact
//! equality for oracle comparisons.

use std::fmt::Debug;

use num_rational::Rational64;
use num_traits::{Num, ToPrimitive};

/// Score scalar: `f32`, `f64` or an exact rational.
pub trait Scalar: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {
    /// `num / den`. A zero denominator is a caller bug.
    fn from_ratio(num: u64, den: u64) -> Self;

    fn from_f64(value: f64) -> Option<Self>;

    fn to_f64(self) -> f64;

    /// Clamp into the unit interval used by every score in the crate.
    fn clamp_unit(self) -> Self {
        if self < Self::zero() {
            Self::zero()
        } else if self > Self::one() {
            Self::one()
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn from_ratio(num: u64, den: u64) -> Self {
        assert!(den != 0, "ratio with zero denominator");
        num as f64 / den as f64
    }

    fn from_f64(value: f64) -> Option<Self> {
        value.is_finite().then_some(value)
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn from_ratio(num: u64, den: u64) -> Self {
        assert!(den != 0, "ratio with zero denominator");
        (num as f64 / den as f64) as f32
    }

    fn from_f64(value: f64) -> Option<Self> {
        value.is_finite().then_some(value as f32)
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for Rational64 {
    fn from_ratio(num: u64, den: u64) -> Self {
        assert!(den != 0, "ratio with zero denominator");
        Rational64::new(num as i64, den as i64)
    }

    fn from_f64(value: f64) -> Option<Self> {
        // Exact thresholds like 1.0 or 0.75 convert without loss.
        Rational64::approximate_float(value)
    }

    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}
