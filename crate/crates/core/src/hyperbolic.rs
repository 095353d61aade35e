//! Upper half-plane primitives: points, the Möbius action of PSL(2,R),
//! automorphy denominators, hyperbolic distance and the Poincaré density.

use std::ops::Mul;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Allowed deviation of `ad - bc` from 1 for user-supplied matrices.
pub const DET_TOL: f64 = 1e-12;

/// Entries with magnitude at or below this are skipped when choosing the sign
/// representative of a PSL(2,R) element.
pub const SIGN_TOL: f64 = 1e-12;

/// A point `x + iy` of the upper half-plane, `y > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HPoint<T> {
    x: T,
    y: T,
}

impl<T: Real> HPoint<T> {
    pub fn new(x: T, y: T) -> Result<Self> {
        if !(y > T::zero()) || !x.is_finite() || !y.is_finite() {
            return Err(Error::NotInUpperHalfPlane {
                x: x.as_f64(),
                y: y.as_f64(),
            });
        }
        Ok(Self { x, y })
    }

    pub fn from_complex(z: Complex<T>) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    /// The point `i`.
    pub fn i() -> Self {
        Self {
            x: T::zero(),
            y: T::one(),
        }
    }

    #[inline]
    pub fn x(&self) -> T {
        self.x
    }

    #[inline]
    pub fn y(&self) -> T {
        self.y
    }

    #[inline]
    pub fn z(&self) -> Complex<T> {
        Complex::new(self.x, self.y)
    }

    #[inline]
    pub fn conj(&self) -> Complex<T> {
        Complex::new(self.x, -self.y)
    }

    pub fn cast<U: Real>(&self) -> HPoint<U> {
        HPoint {
            x: U::lit(self.x.as_f64()),
            y: U::lit(self.y.as_f64()),
        }
    }
}

/// A real unimodular matrix `(a b; c d)` taken modulo sign.
///
/// The stored representative has its first entry of magnitude above
/// [`SIGN_TOL`] positive, so `γ` and `-γ` compare equal entrywise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius<T> {
    a: T,
    b: T,
    c: T,
    d: T,
}

impl<T: Real> Mobius<T> {
    /// Validates `|ad - bc - 1| <= DET_TOL` and canonicalizes the sign.
    pub fn new(a: T, b: T, c: T, d: T) -> Result<Self> {
        let det = a * d - b * c;
        let all_finite = a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite();
        if !all_finite || !((det - T::one()).abs() <= T::lit(DET_TOL)) {
            return Err(Error::NotUnitDeterminant {
                det: det.as_f64(),
                tol: DET_TOL,
            });
        }
        Ok(Self::canonical(a, b, c, d))
    }

    pub fn from_entries(entries: [T; 4]) -> Result<Self> {
        let [a, b, c, d] = entries;
        Self::new(a, b, c, d)
    }

    pub fn identity() -> Self {
        Self {
            a: T::one(),
            b: T::zero(),
            c: T::zero(),
            d: T::one(),
        }
    }

    /// Rescales a matrix with positive determinant to determinant one.
    /// Used for products, whose determinant drifts by rounding only.
    pub(crate) fn normalized(a: T, b: T, c: T, d: T) -> Self {
        let det = a * d - b * c;
        let s = det.sqrt().recip();
        Self::canonical(a * s, b * s, c * s, d * s)
    }

    fn canonical(a: T, b: T, c: T, d: T) -> Self {
        let tol = T::lit(SIGN_TOL);
        let lead = [a, b, c, d].into_iter().find(|v| v.abs() > tol);
        match lead {
            Some(v) if v < T::zero() => Self {
                a: -a,
                b: -b,
                c: -c,
                d: -d,
            },
            _ => Self { a, b, c, d },
        }
    }

    #[inline]
    pub fn entries(&self) -> [T; 4] {
        [self.a, self.b, self.c, self.d]
    }

    #[inline]
    pub fn a(&self) -> T {
        self.a
    }
    #[inline]
    pub fn b(&self) -> T {
        self.b
    }
    #[inline]
    pub fn c(&self) -> T {
        self.c
    }
    #[inline]
    pub fn d(&self) -> T {
        self.d
    }

    pub fn det(&self) -> T {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Self::canonical(self.d, -self.b, -self.c, self.a)
    }

    /// Product `self * other` (apply `other` first), renormalized to unit determinant.
    pub fn compose(&self, other: &Self) -> Self {
        Self::normalized(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )
    }

    /// Largest entrywise difference to `other`; both are canonical representatives.
    pub fn max_entry_diff(&self, other: &Self) -> T {
        self.entries()
            .into_iter()
            .zip(other.entries())
            .map(|(p, q)| (p - q).abs())
            .fold(T::zero(), T::max)
    }

    pub fn is_identity(&self, tol: T) -> bool {
        self.max_entry_diff(&Self::identity()) <= tol
    }

    #[inline]
    pub fn apply(&self, z: HPoint<T>) -> HPoint<T> {
        mobius_apply(self, z)
    }

    pub fn cast<U: Real>(&self) -> Mobius<U> {
        Mobius {
            a: U::lit(self.a.as_f64()),
            b: U::lit(self.b.as_f64()),
            c: U::lit(self.c.as_f64()),
            d: U::lit(self.d.as_f64()),
        }
    }
}

impl<T: Real> Mul for Mobius<T> {
    type Output = Mobius<T>;

    fn mul(self, rhs: Self) -> Self::Output {
        self.compose(&rhs)
    }
}

/// `(az + b)/(cz + d)`.
///
/// The imaginary part is taken from `Im(gz) = y / |cz + d|^2`, which keeps the
/// image strictly inside the upper half-plane.
pub fn mobius_apply<T: Real>(g: &Mobius<T>, z: HPoint<T>) -> HPoint<T> {
    let zc = z.z();
    let num = zc * g.a + g.b;
    let den = zc * g.c + g.d;
    let w = num / den;
    HPoint {
        x: w.re,
        y: z.y / den.norm_sqr(),
    }
}

/// The automorphy denominator `c z̄ + d` of the kernel series.
pub fn cocycle<T: Real>(g: &Mobius<T>, z: HPoint<T>) -> Complex<T> {
    z.conj() * g.c + g.d
}

/// `cosh^2(d_H(z, w)/2) = |z - w̄|^2 / (4 y v)`.
pub fn cosh_sq_half_distance<T: Real>(z: HPoint<T>, w: HPoint<T>) -> T {
    (z.z() - w.conj()).norm_sqr() / (T::lit(4.0) * z.y * w.y)
}

/// Hyperbolic distance `2 arccosh(|z - w̄| / (2 sqrt(y v)))`.
pub fn hyp_distance<T: Real>(z: HPoint<T>, w: HPoint<T>) -> T {
    let ratio = (z.z() - w.conj()).norm() / (T::lit(2.0) * (z.y * w.y).sqrt());
    T::lit(2.0) * ratio.max(T::one()).acosh()
}

/// Displacement `d_H(z, gz)`.
pub fn displacement<T: Real>(g: &Mobius<T>, z: HPoint<T>) -> T {
    hyp_distance(z, mobius_apply(g, z))
}

/// Coefficient `1/y^2` of `dx dy` in the Poincaré area form.
pub fn hyp_metric_density<T: Real>(z: HPoint<T>) -> T {
    (z.y * z.y).recip()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> HPoint<f64> {
        HPoint::new(x, y).unwrap()
    }

    fn inversion() -> Mobius<f64> {
        Mobius::new(0.0, -1.0, 1.0, 0.0).unwrap()
    }

    fn translation() -> Mobius<f64> {
        Mobius::new(1.0, 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_points_off_the_half_plane() {
        assert!(HPoint::new(0.0, 0.0).is_err());
        assert!(HPoint::new(1.0, -2.0).is_err());
        assert!(HPoint::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn rejects_non_unimodular_matrices() {
        assert!(matches!(
            Mobius::new(2.0, 0.0, 0.0, 1.0),
            Err(Error::NotUnitDeterminant { .. })
        ));
        assert!(Mobius::new(1.0, 0.0, 0.0, 1.0 + 1e-13).is_ok());
    }

    #[test]
    fn sign_is_canonical() {
        let m = Mobius::new(0.0, 1.0, -1.0, 0.0).unwrap();
        assert_eq!(m.entries(), [0.0, 1.0, -1.0, 0.0]);
        let n = Mobius::new(-0.0, -1.0, 1.0, 0.0).unwrap();
        assert_eq!(n.entries(), [0.0, 1.0, -1.0, -0.0]);
        let id = Mobius::new(-1.0, 0.0, 0.0, -1.0).unwrap();
        assert!(id.is_identity(0.0));
    }

    #[test]
    fn apply_examples() {
        let i = HPoint::i();
        assert_eq!(mobius_apply(&Mobius::identity(), i), i);
        let w = mobius_apply(&inversion(), i);
        assert!(w.x().abs() < 1e-15 && (w.y() - 1.0).abs() < 1e-15);
        assert_eq!(mobius_apply(&translation(), i), pt(1.0, 1.0));
    }

    #[test]
    fn cocycle_examples() {
        assert_eq!(
            cocycle(&Mobius::identity(), pt(0.3, 2.0)),
            Complex::new(1.0, 0.0)
        );
        // The canonical representative of the inversion is (0, 1; -1, 0), so
        // the denominator is -(c z̄ + d) of the raw matrix; only its even
        // powers enter the kernel series.
        let c = cocycle(&inversion(), HPoint::i());
        assert_eq!(c, Complex::new(0.0, 1.0));
        assert_eq!(c * c, Complex::new(0.0, -1.0) * Complex::new(0.0, -1.0));
        assert_eq!(
            cocycle(&translation(), pt(0.0, 2.0)),
            Complex::new(1.0, 0.0)
        );
    }

    #[test]
    fn distance_examples() {
        let i = HPoint::i();
        assert_eq!(hyp_distance(i, i), 0.0);
        assert!((hyp_distance(i, pt(0.0, 2.0)) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((cosh_sq_half_distance(i, pt(0.0, 2.0)) - 9.0 / 8.0).abs() < 1e-15);
        // 2 arccosh(sqrt(5)/2), evaluated independently at 30 digits.
        assert!((hyp_distance(i, pt(1.0, 1.0)) - 0.962_423_650_119_206_9).abs() < 1e-12);
    }

    #[test]
    fn density_examples() {
        assert_eq!(hyp_metric_density(HPoint::<f64>::i()), 1.0);
        assert_eq!(hyp_metric_density(pt(0.0, 2.0)), 0.25);
        for x in [-3.0, 0.0, 0.7, 12.5] {
            assert_eq!(hyp_metric_density(pt(x, 0.5)), 4.0);
        }
    }

    #[test]
    fn inverse_composes_to_identity() {
        let g = Mobius::new(2.0, 1.0, 3.0, 2.0).unwrap();
        assert!((g * g.inverse()).is_identity(1e-15));
    }

    #[test]
    fn works_in_single_precision() {
        let i = HPoint::<f32>::i();
        let t = Mobius::<f32>::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(mobius_apply(&t, i), HPoint::new(1.0f32, 1.0).unwrap());
        assert!(
            (hyp_distance(i, HPoint::new(0.0f32, 2.0).unwrap()) - std::f32::consts::LN_2).abs()
                < 1e-6
        );
    }
}
