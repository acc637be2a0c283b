//! Real scalar abstraction for the closed-form parts of the workbench.
//!
//! Formulas that need nothing beyond elementary functions (partition
//! functions, evolution coefficients, chain mode sums) are written against
//! [`Real`] so they can be evaluated in `f32` or `f64`. Dense complex linear
//! algebra stays in `f64`.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};

/// floating point: f32 or f64
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Literal conversion; panics only for values unrepresentable in `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `sinh(x)/x` with the removable singularity at 0 filled in.
pub fn sinhc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        let x2 = x * x;
        T::one() + x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0)
    } else {
        x.sinh() / x
    }
}

/// `sinh(x)/x − 1` without cancellation near 0.
pub fn sinhc_m1<T: Real>(x: T) -> T {
    let x2 = x * x;
    if x.abs() < T::lit(0.05) {
        let t = |d: f64| x2 / T::lit(d);
        t(6.0) * (T::one() + t(20.0) * (T::one() + t(42.0) * (T::one() + t(72.0) * (T::one() + t(110.0)))))
    } else {
        x.sinh() / x - T::one()
    }
}

/// `coth(x)` for `x > 0`.
pub fn coth<T: Real>(x: T) -> T {
    T::one() / x.tanh()
}
