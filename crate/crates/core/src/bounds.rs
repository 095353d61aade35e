//! Explicit kernel and Bergman-metric bounds: the constant `C_X`, the
//! two-link upper chain for `B_k^X`, the pointwise metric bound and its
//! large-`k` limits.
//!
//! The injectivity radius that enters `C_X` is, in practice, an upper bound
//! obtained by enumeration. `C_X` decreases in `r_X`, so every metric check
//! also records `C_X` and the resulting right-hand side at `r_X / 2` as a
//! conservative sensitivity value.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::ElementSet;
use crate::hyperbolic::{displacement, HPoint};
use crate::kernel::{bergman_kernel_x, ratio_ber_hyp, KernelEvaluation, MIN_WEIGHT};
use crate::scalar::Real;
use crate::sum::CompensatedSum;

/// Relative tolerance on the right-hand side for pass/fail decisions.
pub const PASS_REL_TOL: f64 = 1e-9;

/// `26/π`, the limit bound for `(1/k^2) |μ_ber/μ_hyp|`.
pub fn corollary1_bound<T: Real>() -> T {
    T::lit(26.0) / T::PI()
}

/// Inputs recorded alongside every bound check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInputs<T> {
    pub z: HPoint<T>,
    pub k: u32,
    pub r_x: T,
    /// `r_x` is an enumeration upper bound, not a certified injectivity radius.
    pub r_x_is_upper_bound: bool,
    pub truncation_word_length: usize,
    pub element_count: usize,
    pub last_shell_magnitude: T,
    pub tail_estimate: T,
}

impl<T: Real> BoundInputs<T> {
    fn from_eval(z: HPoint<T>, r_x: T, eval: &KernelEvaluation<T>) -> Self {
        Self {
            z,
            k: eval.k,
            r_x,
            r_x_is_upper_bound: true,
            truncation_word_length: eval.truncation_word_length,
            element_count: eval.element_count,
            last_shell_magnitude: eval.last_shell_magnitude,
            tail_estimate: eval.tail_estimate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport<T> {
    pub lhs: T,
    pub rhs: T,
    pub slack: T,
    pub passed: bool,
    pub inputs: BoundInputs<T>,
}

impl<T: Real> BoundReport<T> {
    pub fn new(lhs: T, rhs: T, inputs: BoundInputs<T>) -> Self {
        Self {
            lhs,
            rhs,
            slack: rhs - lhs,
            passed: passes(lhs, rhs),
            inputs,
        }
    }
}

/// `lhs <= rhs + PASS_REL_TOL * |rhs|`.
pub fn passes<T: Real>(lhs: T, rhs: T) -> bool {
    lhs <= rhs + T::lit(PASS_REL_TOL) * rhs.abs()
}

/// `C_X` for weight `k` and injectivity radius `r_x`:
///
/// ```text
/// (2k-1)/(4π) (2 + 16/cosh^{2k-4}(r/4) + 8/cosh^{2k-3}(r/2))
///   + (2k-1)/(2π sinh^2(r/4)) (1/((2k-2) cosh^{2k-3}(r/2)) + 1/((k-2) cosh^{2k-4}(r/2)))
/// ```
pub fn constant_cx<T: Real>(k: u32, r_x: T) -> Result<T> {
    if k < MIN_WEIGHT {
        return Err(Error::InvalidWeight(k));
    }
    if !(r_x > T::zero()) || !r_x.is_finite() {
        return Err(Error::InvalidRadius(r_x.as_f64()));
    }
    let kk = k as i32;
    let two_k_minus_1 = T::lit(2.0 * k as f64 - 1.0);
    let pi = T::PI();
    let quarter = r_x / T::lit(4.0);
    let half = r_x / T::lit(2.0);
    let ch_q = quarter.cosh();
    let ch_h = half.cosh();
    let sh_q = quarter.sinh();

    let first = two_k_minus_1 / (T::lit(4.0) * pi)
        * (T::lit(2.0)
            + T::lit(16.0) / ch_q.ipow(2 * kk - 4)
            + T::lit(8.0) / ch_h.ipow(2 * kk - 3));
    let second = two_k_minus_1 / (T::lit(2.0) * pi * sh_q * sh_q)
        * (T::one() / (T::lit(2.0 * k as f64 - 2.0) * ch_h.ipow(2 * kk - 3))
            + T::one() / (T::lit(k as f64 - 2.0) * ch_h.ipow(2 * kk - 4)));
    Ok(first + second)
}

/// `k^2/π · (C/B) · (4C/B + 5 + 1/(2k)) + k/(2π)`.
pub fn theorem1_rhs<T: Real>(k: u32, c_x: T, bkx: T) -> Result<T> {
    if !(bkx > T::zero()) {
        return Err(Error::NonPositiveKernel(bkx.as_f64()));
    }
    let kf = T::lit(k as f64);
    let pi = T::PI();
    let ratio = c_x / bkx;
    Ok(
        kf * kf / pi * ratio * (T::lit(4.0) * ratio + T::lit(5.0) + T::one() / (T::lit(2.0) * kf))
            + kf / (T::lit(2.0) * pi),
    )
}

/// `B_k^X(z) <= (2k-1)/(4π) Σ cosh^{-2k}(d_H(z, γz)/2) <= C_X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainReport<T> {
    pub kernel_le_cosh_sum: BoundReport<T>,
    pub cosh_sum_le_cx: BoundReport<T>,
    /// Relative gap between the cosh sum computed from distances and
    /// `(2k-1)/(4π) (2y)^{2k} Σ |series terms|`.
    pub cosh_sum_identity_error: T,
    pub passed: bool,
}

pub fn kernel_upper_chain<T: Real>(
    z: HPoint<T>,
    k: u32,
    elems: &ElementSet<T>,
    r_x: T,
) -> Result<ChainReport<T>> {
    let eval = bergman_kernel_x(z, k, elems)?;
    let c_x = constant_cx(k, r_x)?;
    let prefactor = T::lit(2.0 * k as f64 - 1.0) / (T::lit(4.0) * T::PI());
    let mut sum = CompensatedSum::new();
    for shell in elems.shells() {
        let shell_sum: CompensatedSum<T> = shell
            .iter()
            .map(|e| {
                (displacement(&e.matrix, z) / T::lit(2.0))
                    .cosh()
                    .ipow(-2 * k as i32)
            })
            .collect();
        sum.add(shell_sum.value());
    }
    let cosh_sum = prefactor * sum.value();
    let identity_error = (cosh_sum - eval.magnitude_sum).abs() / cosh_sum;
    let inputs = BoundInputs::from_eval(z, r_x, &eval);
    let first = BoundReport::new(eval.value.re, cosh_sum, inputs);
    let second = BoundReport::new(cosh_sum, c_x, inputs);
    Ok(ChainReport {
        passed: first.passed && second.passed,
        kernel_le_cosh_sum: first,
        cosh_sum_le_cx: second,
        cosh_sum_identity_error: identity_error,
    })
}

/// Pointwise check of `|μ_ber/μ_hyp| <= theorem1_rhs(k, C_X, B_k^X(z))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1Report<T> {
    pub bound: BoundReport<T>,
    /// Signed ratio `μ_ber/μ_hyp`.
    pub ratio: T,
    pub kernel: T,
    pub c_x: T,
    /// `C_X` at `r_x / 2`.
    pub c_x_sensitivity: T,
    pub rhs_sensitivity: T,
    pub passed_sensitivity: bool,
}

pub fn check_theorem1<T: Real>(
    z: HPoint<T>,
    k: u32,
    elems: &ElementSet<T>,
    r_x: T,
) -> Result<Theorem1Report<T>> {
    let eval = bergman_kernel_x(z, k, elems)?;
    let ratio = ratio_ber_hyp(z, k, elems)?;
    let kernel = eval.value.re;
    let c_x = constant_cx(k, r_x)?;
    let rhs = theorem1_rhs(k, c_x, kernel)?;
    let c_x_sensitivity = constant_cx(k, r_x / T::lit(2.0))?;
    let rhs_sensitivity = theorem1_rhs(k, c_x_sensitivity, kernel)?;
    let lhs = ratio.abs();
    Ok(Theorem1Report {
        bound: BoundReport::new(lhs, rhs, BoundInputs::from_eval(z, r_x, &eval)),
        ratio,
        kernel,
        c_x,
        c_x_sensitivity,
        rhs_sensitivity,
        passed_sensitivity: passes(lhs, rhs_sensitivity),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corollary1Row<T> {
    pub k: u32,
    /// `(1/k^2) |μ_ber/μ_hyp|`.
    pub scaled: T,
    pub bound: T,
    pub below: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Corollary1Scan<T> {
    pub rows: Vec<Corollary1Row<T>>,
    /// Smallest scanned `k` from which every row lies below `26/π`.
    pub threshold_k: Option<u32>,
}

fn suffix_threshold<R>(
    rows: &[R],
    k_of: impl Fn(&R) -> u32,
    ok: impl Fn(&R) -> bool,
) -> Option<u32> {
    let mut threshold = None;
    for row in rows.iter().rev() {
        if !ok(row) {
            break;
        }
        threshold = Some(k_of(row));
    }
    threshold
}

pub fn corollary1_scan<T: Real>(
    z: HPoint<T>,
    k_list: &[u32],
    elems: &ElementSet<T>,
) -> Result<Corollary1Scan<T>> {
    let bound = corollary1_bound::<T>();
    let rows = k_list
        .iter()
        .map(|&k| {
            let ratio = ratio_ber_hyp(z, k, elems)?;
            let kf = T::lit(k as f64);
            let scaled = ratio.abs() / (kf * kf);
            Ok(Corollary1Row {
                k,
                scaled,
                bound,
                below: scaled < bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let threshold_k = suffix_threshold(&rows, |r| r.k, |r| r.below);
    Ok(Corollary1Scan { rows, threshold_k })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticRow<T> {
    pub k: u32,
    pub kernel: T,
    /// `|2π B_k^X(z)/k - 1|`.
    pub deviation: T,
    /// `1/(2k)`, the deviation of the identity term alone.
    pub identity_deviation: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticScan<T> {
    pub rows: Vec<AsymptoticRow<T>>,
    /// Deviations are non-increasing along the scan (slack 1e-12).
    pub decreasing: bool,
}

pub fn asymptotic_kernel_check<T: Real>(
    z: HPoint<T>,
    k_list: &[u32],
    elems: &ElementSet<T>,
) -> Result<AsymptoticScan<T>> {
    let two_pi = T::lit(2.0) * T::PI();
    let rows = k_list
        .iter()
        .map(|&k| {
            let kernel = bergman_kernel_x(z, k, elems)?.value.re;
            let kf = T::lit(k as f64);
            Ok(AsymptoticRow {
                k,
                kernel,
                deviation: (two_pi * kernel / kf - T::one()).abs(),
                identity_deviation: T::one() / (T::lit(2.0) * kf),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slack = T::lit(1e-12);
    let decreasing = rows
        .windows(2)
        .all(|w| w[1].deviation <= w[0].deviation + slack);
    Ok(AsymptoticScan { rows, decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cx_large_radius_limit() {
        for k in [3, 4, 10, 24] {
            let c = constant_cx(k, 1000.0f64).unwrap();
            let limit = (2.0 * k as f64 - 1.0) / (2.0 * PI);
            assert!((c - limit).abs() <= 1e-12 * limit, "{k}: {c} vs {limit}");
            assert!(c >= limit);
        }
    }

    #[test]
    fn cx_is_decreasing_in_radius() {
        for k in [3, 6, 12] {
            let mut prev = f64::INFINITY;
            for r in [0.5, 1.0, 2.0, 3.0571, 5.0, 9.0] {
                let c = constant_cx(k, r).unwrap();
                assert!(c < prev);
                prev = c;
            }
        }
    }

    #[test]
    fn cx_rejects_bad_inputs() {
        assert_eq!(constant_cx(2, 3.0f64).unwrap_err(), Error::InvalidWeight(2));
        assert!(matches!(
            constant_cx(3, 0.0f64),
            Err(Error::InvalidRadius(_))
        ));
        assert!(matches!(
            constant_cx(3, f64::NAN),
            Err(Error::InvalidRadius(_))
        ));
    }

    #[test]
    fn rhs_at_unit_ratio() {
        for k in [3u32, 8, 15] {
            let kf = k as f64;
            let c = 0.37;
            let rhs = theorem1_rhs(k, c, c).unwrap();
            let expected = kf * kf / PI * (9.0 + 1.0 / (2.0 * kf)) + kf / (2.0 * PI);
            assert!((rhs - expected).abs() <= 1e-13 * expected);
        }
    }

    #[test]
    fn rhs_increases_with_ratio() {
        let mut prev = 0.0;
        for ratio in [0.5, 1.0, 1.5, 2.0, 4.0] {
            let rhs = theorem1_rhs(5, ratio, 1.0f64).unwrap();
            assert!(rhs > prev);
            prev = rhs;
        }
        assert!(matches!(
            theorem1_rhs(5, 1.0, 0.0f64),
            Err(Error::NonPositiveKernel(_))
        ));
    }

    #[test]
    fn corollary_constant() {
        assert!((corollary1_bound::<f64>() - 8.276_057_040_778_557).abs() < 1e-14);
    }

    #[test]
    fn identity_only_chain_and_theorem() {
        let e = ElementSet::<f64>::identity_only(2);
        let z = HPoint::new(0.2, 1.4).unwrap();
        let chain = kernel_upper_chain(z, 5, &e, 3.0571).unwrap();
        assert!(chain.passed);
        let base = 9.0 / (4.0 * PI);
        assert!((chain.kernel_le_cosh_sum.lhs - base).abs() < 1e-15);
        assert!((chain.kernel_le_cosh_sum.rhs - base).abs() < 1e-15);
        let t = check_theorem1(z, 5, &e, 3.0571).unwrap();
        assert!(t.bound.lhs < 1e-12);
        assert!(t.bound.passed && t.passed_sensitivity);
        assert!(t.c_x_sensitivity > t.c_x);
    }

    #[test]
    fn identity_only_scans() {
        let e = ElementSet::<f64>::identity_only(2);
        let z = HPoint::i();
        let ks = [3, 5, 8, 13];
        let scan = corollary1_scan(z, &ks, &e).unwrap();
        assert!(scan.rows.iter().all(|r| r.scaled < 1e-12 && r.below));
        assert_eq!(scan.threshold_k, Some(3));
        let asym = asymptotic_kernel_check(z, &ks, &e).unwrap();
        for row in &asym.rows {
            assert!((row.deviation - 1.0 / (2.0 * row.k as f64)).abs() < 1e-14);
        }
        assert!(asym.decreasing);
    }

    #[test]
    fn threshold_requires_suffix() {
        let rows = [(3, false), (4, true), (5, false), (6, true), (7, true)];
        assert_eq!(suffix_threshold(&rows, |r| r.0, |r| r.1), Some(6));
        assert_eq!(suffix_threshold(&rows[..3], |r| r.0, |r| r.1), None);
    }
}
