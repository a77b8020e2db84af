//! Numeric abstractions the evidence algebra is written against.
//!
//! The combination rules, discounting and the unknown-mass floor only need
//! field operations, so they are generic over [`Scalar`] and run unchanged on
//! `f32`, `f64` and exact rationals. Anything needing transcendental functions
//! (the tanh discount factor, the surrogate's distance decay) requires
//! [`Real`].

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Exact rational scalar used by oracle tests and exact evaluations.
pub type Rational = Ratio<i128>;

/// Field-like scalar the mass-function algebra is generic over.
pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Normalization residual below which a mass triple is stored as given.
    ///
    /// Larger residuals (up to the construction tolerance) are divided out.
    fn drift() -> Self;

    /// Converts an `f64` literal or parameter into this scalar.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).unwrap_or_else(|| panic!("{value} is not representable"))
    }

    /// Hyperbolic tangent, exact up to the scalar's own rounding for floats.
    fn tanh_approx(self) -> Self {
        Self::lit(self.to_f64_lossy().tanh())
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn abs_diff(self, other: Self) -> Self {
        if self > other {
            self - other
        } else {
            other - self
        }
    }
}

impl Scalar for f32 {
    fn drift() -> Self {
        4.0 * f32::EPSILON
    }

    fn tanh_approx(self) -> Self {
        self.tanh()
    }
}

impl Scalar for f64 {
    fn drift() -> Self {
        1e-12
    }

    fn tanh_approx(self) -> Self {
        self.tanh()
    }
}

impl Scalar for Rational {
    fn drift() -> Self {
        Ratio::from_integer(0)
    }

    /// Rounded to a multiple of 2⁻²⁴ to keep denominators small.
    fn tanh_approx(self) -> Self {
        let scale = 1i128 << 24;
        Ratio::new((self.to_f64_lossy().tanh() * scale as f64).round() as i128, scale)
    }
}

/// Floating-point scalar: everything in [`Scalar`] plus `exp`, `tanh`, `sqrt`.
pub trait Real: Scalar + Float {}

impl Real for f32 {}
impl Real for f64 {}
