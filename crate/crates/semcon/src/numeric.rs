//! Scalar abstraction for the numeric core.
//!
//! Everything downstream of tokenization (tf-idf weights, cosine distances,
//! contribution scores, correlation and bucket statistics) is generic over a
//! floating-point scalar so the same code runs at `f32` or `f64` precision.
//! The shipped CLI and all golden files use [`Real64`].
//!
//! Transcendental functions go through `libm` rather than the platform math
//! library: output files are compared byte-for-byte across machines, and a
//! one-ulp difference in `ln` would surface in the rendered digits.

use std::fmt::{Debug, Display};
use std::num::ParseFloatError;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssignOps, NumCast, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumCast
    + NumAssignOps
    + FromStr<Err = ParseFloatError>
    + Display
    + Debug
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Natural logarithm with a platform-independent implementation.
    fn real_ln(self) -> Self;

    /// Base-2 exponential with a platform-independent implementation.
    fn real_exp2(self) -> Self;
}

impl Real for f64 {
    fn real_ln(self) -> Self {
        libm::log(self)
    }

    fn real_exp2(self) -> Self {
        libm::exp2(self)
    }
}

impl Real for f32 {
    fn real_ln(self) -> Self {
        libm::logf(self)
    }

    fn real_exp2(self) -> Self {
        libm::exp2f(self)
    }
}

/// Default scalar for the shipped pipeline, CLI, and golden files.
pub type Real64 = f64;

/// Clamp a value into [0, 1].
///
/// Similarity and distance are mathematically confined to the unit interval;
/// floating-point rounding can push results a few ulps outside it, and the
/// clamp keeps downstream bounds checks honest.
pub fn clamp_unit<R: Real>(value: R) -> R {
    if value < R::zero() {
        R::zero()
    } else if value > R::one() {
        R::one()
    } else {
        value
    }
}

/// Kahan compensated accumulator: sequential summation with an error term,
/// cutting worst-case rounding growth from O(n) to O(1) ulps.
///
/// Used where a sum feeds a tight numeric tolerance (pairwise-distance
/// accumulation, correlation moments) so results stay stable as inputs grow.
#[derive(Debug, Clone, Copy)]
pub struct KahanSum<R: Real> {
    sum: R,
    compensation: R,
}

impl<R: Real> Default for KahanSum<R> {
    fn default() -> Self {
        KahanSum {
            sum: R::zero(),
            compensation: R::zero(),
        }
    }
}

impl<R: Real> KahanSum<R> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: R) {
        let y = x - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn total(&self) -> R {
        self.sum
    }
}

/// Render a value with the given number of significant digits, in plain
/// decimal notation.
///
/// All emitted CSV and JSON summary files use 12 significant digits. The
/// decade is read off a scientific rendering already rounded to the target
/// precision, so boundary values that round up into the next decade
/// (e.g. `9.9999...e-3` → `1.00000000000e-2`) keep exactly `digits`
/// significant digits instead of gaining one.
pub fn significant(value: f64, digits: usize) -> String {
    assert!(digits >= 1, "digits must be >= 1");
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let mantissa_places = digits - 1;
    let sci = format!("{value:.mantissa_places$e}");
    let exp: i32 = sci[sci.find('e').expect("exponent marker") + 1..]
        .parse()
        .expect("exponent digits");
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{value:.decimals$}")
}
