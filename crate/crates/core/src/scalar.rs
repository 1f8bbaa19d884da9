//! Numeric abstraction shared by every formula in the crate.
//!
//! Ratings, averages, similarities and predictions are all carried as a
//! [`Scalar`]. `f64` is the workhorse; `f32` works for memory-bound runs and
//! [`num_rational::BigRational`] gives exact arithmetic, which the test
//! oracles use to compare against the implementation without tolerances.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Real-number-like type usable as a rating or score.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Converts a count into the scalar type.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Converts a configuration knob into the scalar type.
    fn from_knob(x: f64) -> Self {
        Self::from_f64(x).expect("finite configuration value")
    }

    /// Lossy conversion used at reporting boundaries.
    fn to_report(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn clamp_to(self, lo: &Self, hi: &Self) -> Self {
        Self::min_of(Self::max_of(self, lo.clone()), hi.clone())
    }
}

impl<T> Scalar for T where
    T: Num
        + Signed
        + Clone
        + PartialOrd
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Send
        + Sync
        + 'static
{
}

/// Rounds to six significant digits, the precision of every number the
/// tool writes to disk.
pub fn round_sig6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

/// Formats with six significant digits and no trailing zeros.
pub fn fmt_sig6(x: f64) -> String {
    let r = round_sig6(x);
    if r == 0.0 {
        // avoid "-0"
        "0".to_string()
    } else {
        r.to_string()
    }
}
