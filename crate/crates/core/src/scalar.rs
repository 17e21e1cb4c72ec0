//! The floating-point scalar every model, estimate and metric is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// A real scalar: `f32` or `f64`.
///
/// `Display` must print the shortest decimal that parses back to the same
/// value, which holds for both primitive float types; model files rely on it.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Display
    + Debug
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal or intermediate, rounding to nearest.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::nan)
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::infinity)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `ln Γ(a + n) − ln Γ(a)` for integral `n`, as a sum of logs of the rising
/// factorial terms.
pub(crate) fn ln_rising<F: Real>(a: F, n: usize) -> F {
    let mut acc = F::zero();
    let mut term = a;
    for _ in 0..n {
        acc += term.ln();
        term += F::one();
    }
    acc
}
