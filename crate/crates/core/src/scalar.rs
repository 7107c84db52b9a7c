//! Scalar abstraction shared by the geometric and combinatorial layers.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the geometry, graph and exact-solver code is generic over.
///
/// Implemented for `f32` and `f64`. The Monte Carlo harness and the CLI run on
/// `f64` only.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Absolute tolerance for comparing objective values (total power).
    const VALUE_TOL: f64 = 1e-9;
    /// Slack added to a node's power when testing whether it covers an edge.
    const COVER_SLACK: f64;

    /// Converts an `f64` literal. Panics only for values the type cannot hold at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal out of range for scalar type")
    }

    #[inline]
    fn value_tol() -> Self {
        Self::lit(Self::VALUE_TOL)
    }

    #[inline]
    fn cover_slack() -> Self {
        Self::lit(Self::COVER_SLACK)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const COVER_SLACK: f64 = 1e-12;
}

impl Scalar for f32 {
    // 1e-12 is far below f32 resolution for values near 1.
    const VALUE_TOL: f64 = 1e-5;
    const COVER_SLACK: f64 = 1e-7;
}

/// Powers `base` by `p`, with a fast path for small integral exponents so that
/// `p = 1, 2, 3` round exactly like hand-written products.
#[inline]
pub fn pow_real<T: Scalar>(base: T, p: T) -> T {
    if p == T::one() {
        base
    } else if p == T::lit(2.0) {
        base * base
    } else if p == T::lit(3.0) {
        base * base * base
    } else {
        base.powf(p)
    }
}
