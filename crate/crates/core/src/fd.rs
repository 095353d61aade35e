//! Central finite differences with one Richardson refinement step.

use crate::scalar::Real;

/// Central estimate of `∂²f/∂s∂t` at the origin with step `h`.
pub fn mixed_second<T: Real>(f: impl Fn(T, T) -> T, h: T) -> T {
    (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (T::lit(4.0) * h * h)
}

/// `mixed_second` refined as `(4 D(h/2) - D(h)) / 3`, cancelling the `h^2` error term.
pub fn mixed_second_richardson<T: Real>(f: impl Fn(T, T) -> T, h: T) -> T {
    let coarse = mixed_second(&f, h);
    let fine = mixed_second(&f, h * T::lit(0.5));
    (T::lit(4.0) * fine - coarse) / T::lit(3.0)
}

/// Central first derivative `f'(0)` refined by one Richardson step.
pub fn first_richardson<T: Real>(f: impl Fn(T) -> T, h: T) -> T {
    let d = |h: T| (f(h) - f(-h)) / (T::lit(2.0) * h);
    (T::lit(4.0) * d(h * T::lit(0.5)) - d(h)) / T::lit(3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_low_degree_polynomials() {
        let f = |s: f64, t: f64| 3.0 * s * t + s * s * t * t + 2.0 * s;
        assert!((mixed_second_richardson(f, 1e-2) - 3.0).abs() < 1e-10);
        let g = |s: f64| s.powi(3) + 5.0 * s;
        assert!((first_richardson(g, 1e-2) - 5.0).abs() < 1e-10);
    }

    #[test]
    fn diagonal_case_is_second_derivative() {
        let f = |s: f64, t: f64| (s + t).exp();
        assert!((mixed_second_richardson(f, 1e-3) - 1.0).abs() < 1e-8);
    }
}
