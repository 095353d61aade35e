use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the geometry, kernel and bound code is written against.
///
/// Implemented for `f32` and `f64`. Reports and tolerances are defined in
/// double precision; `f32` instantiations are useful for quick sweeps but
/// cannot meet the default tolerances.
pub trait Real:
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
    /// Converts a double-precision literal, panicking only if the value is not
    /// representable at all (never the case for finite `f64` into `f32`/`f64`).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Integer power by repeated squaring.
    ///
    /// Unlike `powi`, which may be expanded differently depending on whether
    /// the exponent is known where it is inlined, this gives the same bits at
    /// every call site.
    fn ipow(self, n: i32) -> Self {
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ipow_matches_exact_values() {
        assert_eq!(3f64.ipow(0), 1.0);
        assert_eq!(3f64.ipow(5), 243.0);
        assert_eq!(2f64.ipow(-3), 0.125);
        assert_eq!(1.5f32.ipow(2), 2.25);
        let x = 1.37f64;
        assert!((x.ipow(17) - x.powf(17.0)).abs() < 1e-13 * x.powf(17.0));
    }
}
