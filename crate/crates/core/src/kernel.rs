//! Truncated automorphic series for the weight-k Bergman kernel of `Γ\H`.
//!
//! For `γ = (a b; c d)` write `w_γ(z) = (z - γz̄)(cz̄ + d) = z(cz̄ + d) - (az̄ + b)`.
//! The series
//!
//! ```text
//! B_k(z) = Σ_γ i^{2k} / w_γ(z)^{2k}
//! ```
//!
//! is evaluated in the scaled form `Σ_γ i^{2k} (2y / w_γ)^{2k}`, whose terms
//! have modulus `cosh^{-2k}(d_H(z, γz)/2) <= 1` because `|w_γ| = 2y cosh(d/2)`.
//! The unscaled value is recovered by the factor `(2y)^{-2k}`, and
//! `B_k^X = (2k-1)/(4π) (2y)^{2k} B_k` is read off the scaled sum directly, so no
//! power of `y` is ever formed for the kernel itself.
//!
//! Sums run shell by shell in the element set's canonical order with
//! compensated accumulation, so results do not depend on thread counts.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::ElementSet;
use crate::hyperbolic::HPoint;
use crate::scalar::Real;
use crate::sum::{CompensatedSum, ComplexSum};

pub const MIN_WEIGHT: u32 = 3;

/// Scaled sums below this magnitude are reported as degenerate.
pub const DEGENERATE_KERNEL: f64 = 1e-300;

/// A truncated series value with its truncation metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEvaluation<T> {
    pub value: Complex<T>,
    pub k: u32,
    pub truncation_word_length: usize,
    pub element_count: usize,
    /// Sum of `|term|` over the whole truncated series, on the scale of `value`.
    pub magnitude_sum: T,
    /// Sum of `|term|` over the outermost word-length shell.
    pub last_shell_magnitude: T,
    /// Heuristic geometric extrapolation of the omitted shells. Never added to `value`.
    pub tail_estimate: T,
}

/// `∂B_k/∂z`, `∂B_k/∂z̄` and `∂²B_k/∂z∂z̄` together with `B_k` itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeBundle<T> {
    pub value: Complex<T>,
    pub dz: Complex<T>,
    pub dzbar: Complex<T>,
    pub dzdzbar: Complex<T>,
    pub k: u32,
    pub truncation_word_length: usize,
    pub element_count: usize,
    pub last_shell_magnitude: T,
    pub tail_estimate: T,
}

/// Scaled sums: every entry carries the factor `(2y)^{2k}` relative to the
/// unscaled series.
#[derive(Debug, Clone)]
struct ScaledSums<T> {
    b: Complex<T>,
    dz: Complex<T>,
    dzbar: Complex<T>,
    dzdzbar: Complex<T>,
    magnitude: T,
    shell_magnitudes: Vec<T>,
}

fn validate<T: Real>(k: u32, elems: &ElementSet<T>) -> Result<()> {
    if k < MIN_WEIGHT {
        return Err(Error::InvalidWeight(k));
    }
    if !elems.contains_identity() {
        return Err(Error::MissingIdentity);
    }
    Ok(())
}

fn scaled_sums<T: Real>(
    z: HPoint<T>,
    k: u32,
    elems: &ElementSet<T>,
    derivatives: bool,
) -> ScaledSums<T> {
    let n = 2 * k as i32;
    let nf = T::lit(n as f64);
    let sign = if k.is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    };
    let two_y = Complex::new(T::lit(2.0) * z.y(), T::zero());
    let zc = z.z();
    let zb = z.conj();

    let mut b = ComplexSum::new();
    let mut dz = ComplexSum::new();
    let mut dzbar = ComplexSum::new();
    let mut dzdzbar = ComplexSum::new();
    let mut magnitude = CompensatedSum::new();
    let mut shell_magnitudes = Vec::with_capacity(elems.shell_count());

    for shell in elems.shells() {
        let mut shell_b = ComplexSum::new();
        let mut shell_dz = ComplexSum::new();
        let mut shell_dzbar = ComplexSum::new();
        let mut shell_dd = ComplexSum::new();
        let mut shell_mag = CompensatedSum::new();
        for e in shell {
            let [a, bb, c, d] = e.matrix.entries();
            let den_bar = zb * c + d;
            let w = zc * den_bar - (zb * a + bb);
            let q = (two_y / w).powi(n) * sign;
            shell_b.add(q);
            shell_mag.add(q.norm());
            if derivatives {
                // ∂/∂z of w^{-n} is -n (cz̄ + d) w^{-n-1}.
                shell_dz.add(q * den_bar / w * (-nf));
                // ∂/∂z̄ of w^{-n} is -n (cz - a) w^{-n-1}.
                shell_dzbar.add(q * (zc * c - a) / w * (-nf));
                // Mixed derivative in the conjugate-indexed form with
                // v = (z̄ - γz)(cz + d): -n(n+1)/v^{n+2} + c n^2 / v^{n+1}.
                let v = zb * (zc * c + d) - (zc * a + bb);
                let qv = (two_y / v).powi(n) * sign;
                let inner = (v * v).inv() * (-nf * (nf + T::one())) + v.inv() * (c * nf * nf);
                shell_dd.add(qv * inner);
            }
        }
        b.add(shell_b.value());
        dz.add(shell_dz.value());
        dzbar.add(shell_dzbar.value());
        dzdzbar.add(shell_dd.value());
        let m = shell_mag.value();
        magnitude.add(m);
        shell_magnitudes.push(m);
    }

    ScaledSums {
        b: b.value(),
        dz: dz.value(),
        dzbar: dzbar.value(),
        dzdzbar: dzdzbar.value(),
        magnitude: magnitude.value(),
        shell_magnitudes,
    }
}

/// `last^2 / (previous - last)` clamped to `last`; `last` itself when shells
/// are not decreasing, zero with a single shell.
fn tail_estimate<T: Real>(shells: &[T]) -> T {
    match shells {
        [] | [_] => T::zero(),
        [.., prev, last] => {
            let (prev, last) = (*prev, *last);
            if prev > last {
                (last * last / (prev - last)).min(last)
            } else {
                last
            }
        }
    }
}

fn evaluation<T: Real>(
    sums: &ScaledSums<T>,
    scale: T,
    k: u32,
    elems: &ElementSet<T>,
) -> KernelEvaluation<T> {
    let last = sums
        .shell_magnitudes
        .last()
        .copied()
        .unwrap_or_else(T::zero);
    KernelEvaluation {
        value: sums.b * scale,
        k,
        truncation_word_length: elems.truncation_word_length(),
        element_count: elems.len(),
        magnitude_sum: sums.magnitude * scale,
        last_shell_magnitude: last * scale,
        tail_estimate: tail_estimate(&sums.shell_magnitudes) * scale,
    }
}

fn unscale<T: Real>(z: HPoint<T>, k: u32) -> T {
    (T::lit(2.0) * z.y()).ipow(-2 * k as i32)
}

fn kernel_prefactor<T: Real>(k: u32) -> T {
    T::lit(2.0 * k as f64 - 1.0) / (T::lit(4.0) * T::PI())
}

/// `B_k(z) = Σ_γ i^{2k} / ((z - γz̄)^{2k} (cz̄ + d)^{2k})` over `elems`.
pub fn series_b<T: Real>(
    z: HPoint<T>,
    k: u32,
    elems: &ElementSet<T>,
) -> Result<KernelEvaluation<T>> {
    validate(k, elems)?;
    let sums = scaled_sums(z, k, elems, false);
    Ok(evaluation(&sums, unscale(z, k), k, elems))
}

/// `B_k^X(z) = (2k - 1)/(4π) (2y)^{2k} B_k(z)`.
pub fn bergman_kernel_x<T: Real>(
    z: HPoint<T>,
    k: u32,
    elems: &ElementSet<T>,
) -> Result<KernelEvaluation<T>> {
    validate(k, elems)?;
    let sums = scaled_sums(z, k, elems, false);
    Ok(evaluation(&sums, kernel_prefactor(k), k, elems))
}

/// The three derivative series of `B_k`.
///
/// `dz` differentiates the defining series termwise. `dzbar` is the termwise
/// `z̄`-derivative `-2k i^{2k} (cz - a) / w_γ^{2k+1}`, which is the conjugate-form
/// series `-Σ 2k i^{2k} / ((z̄ - γz)^{2k+1} (cz + d)^{2k})` reindexed by
/// `γ -> γ^{-1}`; the two agree on inverse-closed element sets. `dzdzbar` is
/// `-Σ 2k(2k+1) i^{2k} / ((z̄ - γz)^{2k+2} (cz + d)^{2k+2}) + Σ 4ck^2 i^{2k} /
/// ((z̄ - γz)^{2k+1} (cz + d)^{2k+1})`.
pub fn series_derivatives<T: Real>(
    z: HPoint<T>,
    k: u32,
    elems: &ElementSet<T>,
) -> Result<DerivativeBundle<T>> {
    validate(k, elems)?;
    let sums = scaled_sums(z, k, elems, true);
    let scale = unscale(z, k);
    let eval = evaluation(&sums, scale, k, elems);
    Ok(DerivativeBundle {
        value: eval.value,
        dz: sums.dz * scale,
        dzbar: sums.dzbar * scale,
        dzdzbar: sums.dzdzbar * scale,
        k,
        truncation_word_length: eval.truncation_word_length,
        element_count: eval.element_count,
        last_shell_magnitude: eval.last_shell_magnitude,
        tail_estimate: eval.tail_estimate,
    })
}

/// `μ_ber / μ_hyp = k/(2π) + (y^2/π) (∂B ∂̄B / B^2 - ∂∂̄B / B)`.
///
/// All quotients are formed from the scaled sums, in which the `(2y)^{2k}`
/// factor cancels.
pub fn ratio_ber_hyp<T: Real>(z: HPoint<T>, k: u32, elems: &ElementSet<T>) -> Result<T> {
    validate(k, elems)?;
    let s = scaled_sums(z, k, elems, true);
    if !(s.b.norm() >= T::lit(DEGENERATE_KERNEL)) {
        return Err(Error::DegenerateKernel(s.b.norm().as_f64()));
    }
    let y = z.y();
    let first = s.dz / s.b * (s.dzbar / s.b);
    let second = s.dzdzbar / s.b;
    let correction = (first - second).re * y * y / T::PI();
    Ok(T::lit(k as f64) / (T::lit(2.0) * T::PI()) + correction)
}

/// Density of `μ_ber^k` with respect to `dx dy`: the ratio to `μ_hyp` times `1/y^2`.
pub fn bergman_metric_density<T: Real>(z: HPoint<T>, k: u32, elems: &ElementSet<T>) -> Result<T> {
    let y = z.y();
    Ok(ratio_ber_hyp(z, k, elems)? / (y * y))
}
