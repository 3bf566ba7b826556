//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the library is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion from a count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerances are never allowed below a few ulps of the working precision.
    #[inline]
    fn floor_tol(tol: Self) -> Self {
        tol.max(Self::lit(4.0) * Self::epsilon())
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `ln(1 - exp(-x))` for `x >= 0`, accurate at both ends.
#[inline]
pub fn ln1mexp<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::neg_infinity()
    } else if x < T::LN_2() {
        (-(-x).exp_m1()).ln()
    } else {
        (-(-x).exp()).ln_1p()
    }
}

/// `ln(1 - exp(-exp(lu)))`, usable when `exp(lu)` underflows.
#[inline]
pub fn ln1mexp_of_log<T: Real>(lu: T) -> T {
    if lu < T::lit(-36.0) {
        // 1 - e^{-u} = u (1 - u/2 + ...)
        lu - lu.exp() / T::lit(2.0)
    } else {
        ln1mexp(lu.exp())
    }
}

/// `u / expm1(u)` for `u >= 0`, equal to 1 at the origin.
#[inline]
pub fn u_over_expm1<T: Real>(u: T) -> T {
    if u < T::lit(1e-5) {
        T::one() - u / T::lit(2.0) + u * u / T::lit(12.0)
    } else {
        u / u.exp_m1()
    }
}
