use std::fmt::Debug;

use crate::special_fn::ExtendedReal;

use super::Precision;

/// Number type a slice is stored in. The recursion only needs exact halving,
/// a correctly rounded (or better) gain `x / t`, addition and `max`.
pub trait Lane: Copy + Send + Sync + PartialOrd + Debug + 'static {
    const PRECISION: Precision;

    fn from_f64(v: f64) -> Self;

    /// `x / t` to the lane's precision.
    fn ratio(x: f64, t: f64) -> Self;

    /// `(a + b) / 2`.
    fn midpoint(a: Self, b: Self) -> Self;

    #[inline]
    fn max(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }

    fn to_f64(self) -> f64;

    fn to_extended(self) -> ExtendedReal;

    /// Leading and trailing words, for bit-exact storage.
    fn parts(self) -> (f64, f64);

    fn from_parts(hi: f64, lo: f64) -> Self;
}

impl Lane for f64 {
    const PRECISION: Precision = Precision::Standard;

    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }

    #[inline]
    fn ratio(x: f64, t: f64) -> Self {
        x / t
    }

    #[inline]
    fn midpoint(a: Self, b: Self) -> Self {
        (a + b) * 0.5
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }

    fn to_extended(self) -> ExtendedReal {
        ExtendedReal::from_f64(self)
    }

    fn parts(self) -> (f64, f64) {
        (self, 0.0)
    }

    fn from_parts(hi: f64, _lo: f64) -> Self {
        hi
    }
}

impl Lane for ExtendedReal {
    const PRECISION: Precision = Precision::Extended;

    #[inline]
    fn from_f64(v: f64) -> Self {
        ExtendedReal::from_f64(v)
    }

    #[inline]
    fn ratio(x: f64, t: f64) -> Self {
        ExtendedReal::ratio(x, t)
    }

    #[inline]
    fn midpoint(a: Self, b: Self) -> Self {
        ExtendedReal::midpoint(a, b)
    }

    #[inline]
    fn to_f64(self) -> f64 {
        ExtendedReal::to_f64(self)
    }

    fn to_extended(self) -> ExtendedReal {
        self
    }

    fn parts(self) -> (f64, f64) {
        (self.hi(), self.lo())
    }

    fn from_parts(hi: f64, lo: f64) -> Self {
        ExtendedReal::from_parts(hi, lo)
    }
}
