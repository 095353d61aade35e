//! Fubini–Study geometry in affine charts of `Gr(r, n)` and the volume
//! comparison on symmetric products `Sym^d(X)`.
//!
//! A chart point is an `(n - r) × r` complex matrix `M`; the frame
//! `[Id_r; M]` spans the subspace and the Fubini–Study potential is
//! `log det(Id + M*M)`.
//!
//! On `Sym^d(X)` the pulled-back Fubini–Study volume is approximated by the
//! product of the per-point Bergman metric densities: the kernel of sections
//! vanishing on the divisor is replaced by `B_k^X`, which differs from it by
//! `O(1/k)`. That remainder is not quantified, so every Sym^d output carries
//! [`SUBSTITUTION_CAVEAT`] and no Sym^d bound is certified.

use num_complex::Complex;
use serde::Serialize;

use crate::bounds::{constant_cx, corollary1_bound, theorem1_rhs};
use crate::error::{Error, Result};
use crate::fd;
use crate::group::ElementSet;
use crate::hyperbolic::{hyp_metric_density, HPoint};
use crate::kernel::{bergman_kernel_x, ratio_ber_hyp};
use crate::scalar::Real;

/// Base finite-difference step for chart derivatives, scaled by `max(1, max|m|)`.
pub const FS_FD_STEP: f64 = 1e-3;

/// Largest chart entry for which finite differences are attempted.
pub const MAX_CHART_ENTRY: f64 = 1e8;

pub const SUBSTITUTION_CAVEAT: &str = "Sym^d values use B_k^X in place of the kernel of sections \
vanishing on the divisor (an O(1/k) substitution); the resulting o_z(k) remainder is \
unquantified, so these values are estimates and the product bound is not certified.";

/// Dimensions `n_k = (2k - 1)(g - 1)` and `r_k = n_k - d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GrassmannDims {
    pub genus: u32,
    pub k: u32,
    pub d: usize,
    pub n_k: usize,
    pub r_k: usize,
}

impl GrassmannDims {
    /// Requires `2(k - 1)(g - 1) > d`, which also gives `r_k >= 1`.
    pub fn new(genus: u32, k: u32, d: usize) -> Result<Self> {
        if genus < 2 {
            return Err(Error::InvalidGenus(genus));
        }
        let g1 = genus as usize - 1;
        let ku = k as usize;
        if ku == 0 || 2 * (ku - 1) * g1 <= d {
            return Err(Error::DimsViolation { k, genus, d });
        }
        let n_k = (2 * ku - 1) * g1;
        Ok(Self {
            genus,
            k,
            d,
            n_k,
            r_k: n_k - d,
        })
    }

    /// Complex dimension `r_k (n_k - r_k)` of the Grassmannian.
    pub fn grassmannian_dim(&self) -> usize {
        self.r_k * (self.n_k - self.r_k)
    }
}

/// An affine chart point `M` of `Gr(cols, rows + cols)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Real> ChartMatrix<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    /// The origin of the chart of `Gr(r_k, n_k)`: a `d × r_k` zero matrix.
    pub fn origin(dims: &GrassmannDims) -> Self {
        Self::zeros(dims.n_k - dims.r_k, dims.r_k)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[row * self.cols + col]
    }

    /// `Id + M*M`, an `r × r` Hermitian positive-definite matrix (row-major).
    pub fn gram(&self) -> Vec<Complex<T>> {
        let r = self.cols;
        let mut g = vec![Complex::new(T::zero(), T::zero()); r * r];
        for a in 0..r {
            for b in a..r {
                let mut acc = if a == b {
                    Complex::new(T::one(), T::zero())
                } else {
                    Complex::new(T::zero(), T::zero())
                };
                for row in 0..self.rows {
                    acc = acc + self.get(row, a).conj() * self.get(row, b);
                }
                g[a * r + b] = acc;
                g[b * r + a] = acc.conj();
            }
        }
        g
    }

    fn max_entry(&self) -> T {
        self.entries
            .iter()
            .map(|e| e.norm())
            .fold(T::zero(), T::max)
    }
}

/// `s*(Id + M*M)s = |s|^2 + |Ms|^2`.
pub fn fs_norm_sq<T: Real>(m: &ChartMatrix<T>, s: &[Complex<T>]) -> Result<T> {
    if s.len() != m.cols {
        return Err(Error::DimensionMismatch {
            expected: m.cols,
            got: s.len(),
        });
    }
    let top: T = s.iter().map(|v| v.norm_sqr()).sum();
    let bottom: T = (0..m.rows)
        .map(|row| {
            (0..m.cols)
                .fold(Complex::new(T::zero(), T::zero()), |acc, col| {
                    acc + m.get(row, col) * s[col]
                })
                .norm_sqr()
        })
        .sum();
    Ok(top + bottom)
}

/// `log det(Id + M*M)` via a Cholesky factorization of the Gram matrix.
pub fn fs_log_det<T: Real>(m: &ChartMatrix<T>) -> T {
    let r = m.cols;
    let g = m.gram();
    let mut l = vec![Complex::new(T::zero(), T::zero()); r * r];
    let mut log_det = T::zero();
    for j in 0..r {
        let mut diag = g[j * r + j].re;
        for p in 0..j {
            diag = diag - l[j * r + p].norm_sqr();
        }
        // Id + M*M >= Id, so the pivot never drops below one in exact arithmetic.
        let ljj = diag.max(T::min_positive_value()).sqrt();
        l[j * r + j] = Complex::new(ljj, T::zero());
        log_det = log_det + T::lit(2.0) * ljj.ln();
        for i in (j + 1)..r {
            let mut acc = g[i * r + j];
            for p in 0..j {
                acc = acc - l[i * r + p] * l[j * r + p].conj();
            }
            l[i * r + j] = acc / ljj;
        }
    }
    log_det
}

fn check_entries<T: Real>(m: &ChartMatrix<T>) -> Result<T> {
    let max = m.max_entry();
    if !(max <= T::lit(MAX_CHART_ENTRY)) {
        return Err(Error::StepUnderflow(max.as_f64()));
    }
    Ok(T::lit(FS_FD_STEP) * T::one().max(max))
}

/// `(1/2π) ∂²/∂m_i ∂m̄_j log det(Id + M*M)` for flattened (row-major) entry
/// indices `i`, `j`, by Richardson-refined central differences.
///
/// This is the coefficient matrix of the Fubini–Study Kähler form in the
/// chart, normalized so that `Gr(1, 2)` at the origin gives `1/(2π)`.
pub fn fs_form_fd<T: Real>(m: &ChartMatrix<T>, i: usize, j: usize) -> Result<Complex<T>> {
    let len = m.entries.len();
    for index in [i, j] {
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
    }
    let h = check_entries(m)?;
    let f = |di: Complex<T>, dj: Complex<T>| {
        let mut shifted = m.clone();
        shifted.entries[i] = shifted.entries[i] + di;
        shifted.entries[j] = shifted.entries[j] + dj;
        fs_log_det(&shifted)
    };
    let re = Complex::new(T::one(), T::zero());
    let im = Complex::new(T::zero(), T::one());
    let partial =
        |u: Complex<T>, v: Complex<T>| fd::mixed_second_richardson(|s, t| f(u * s, v * t), h);
    let xx = partial(re, re);
    let yy = partial(im, im);
    let xy = partial(re, im);
    let yx = partial(im, re);
    let quarter = T::lit(0.25);
    let wirtinger = Complex::new((xx + yy) * quarter, (xy - yx) * quarter);
    Ok(wirtinger / (T::lit(2.0) * T::PI()))
}

/// All chart coefficients `fs_form_fd(M, i, j)` as a row-major `N × N` matrix.
pub fn fs_form_matrix<T: Real>(m: &ChartMatrix<T>) -> Result<Vec<Complex<T>>> {
    let n = m.entries.len();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(fs_form_fd(m, i, j)?);
        }
    }
    Ok(out)
}

/// A point of `Sym^d(X)`: an unordered `d`-tuple of upper half-plane points,
/// stored sorted lexicographically by `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymPoint<T> {
    points: Vec<HPoint<T>>,
}

impl<T: Real> SymPoint<T> {
    pub fn new(mut points: Vec<HPoint<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        points.sort_by(|p, q| {
            p.x()
                .partial_cmp(&q.x())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(
                    p.y()
                        .partial_cmp(&q.y())
                        .unwrap_or(std::cmp::Ordering::Equal),
                )
        });
        Ok(Self { points })
    }

    pub fn points(&self) -> &[HPoint<T>] {
        &self.points
    }

    pub fn degree(&self) -> usize {
        self.points.len()
    }
}

/// `∏ 1/y_i^2`, the density of the product Poincaré volume form.
pub fn symd_hyp_volume_density<T: Real>(p: &SymPoint<T>) -> T {
    p.points
        .iter()
        .map(|z| hyp_metric_density(*z))
        .fold(T::one(), |acc, v| acc * v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FsVolumeEstimate<T> {
    /// `∏ (μ_ber/μ_hyp)(z_i) · ∏ 1/y_i^2`.
    pub value: T,
    /// Per-point ratios `μ_ber/μ_hyp`, in the sorted point order.
    pub factors: Vec<T>,
    pub hyp_volume_density: T,
    pub caveat: &'static str,
}

pub fn symd_fs_volume_estimate<T: Real>(
    p: &SymPoint<T>,
    k: u32,
    elems: &ElementSet<T>,
) -> Result<FsVolumeEstimate<T>> {
    GrassmannDims::new(elems.genus(), k, p.degree())?;
    let factors = p
        .points
        .iter()
        .map(|z| ratio_ber_hyp(*z, k, elems))
        .collect::<Result<Vec<_>>>()?;
    let hyp = symd_hyp_volume_density(p);
    let value = factors.iter().fold(T::one(), |acc, f| acc * *f) * hyp;
    Ok(FsVolumeEstimate {
        value,
        factors,
        hyp_volume_density: hyp,
        caveat: SUBSTITUTION_CAVEAT,
    })
}

/// `∏_i theorem1_rhs(k, C_X, B_k^X(z_i))`; the `o_z(k)` remainder is not included.
pub fn theorem2_rhs<T: Real>(p: &SymPoint<T>, k: u32, elems: &ElementSet<T>, r_x: T) -> Result<T> {
    GrassmannDims::new(elems.genus(), k, p.degree())?;
    let c_x = constant_cx(k, r_x)?;
    let mut product: Option<T> = None;
    for z in &p.points {
        let kernel = bergman_kernel_x(*z, k, elems)?.value.re;
        let factor = theorem1_rhs(k, c_x, kernel)?;
        product = Some(product.map_or(factor, |acc| acc * factor));
    }
    Ok(product.expect("SymPoint is non-empty"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corollary2Row<T> {
    pub k: u32,
    /// `(1/k^{2d}) |estimate / hyp volume density|`.
    pub scaled: T,
    pub bound: T,
    pub below: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Corollary2Scan<T> {
    pub rows: Vec<Corollary2Row<T>>,
    pub threshold_k: Option<u32>,
    pub caveat: &'static str,
}

pub fn corollary2_scan<T: Real>(
    p: &SymPoint<T>,
    k_list: &[u32],
    elems: &ElementSet<T>,
) -> Result<Corollary2Scan<T>> {
    let d = p.degree();
    let bound = corollary1_bound::<T>().ipow(d as i32);
    let rows = k_list
        .iter()
        .map(|&k| {
            let est = symd_fs_volume_estimate(p, k, elems)?;
            let kf = T::lit(k as f64);
            let scaled = (est.value / est.hyp_volume_density).abs() / kf.ipow(2 * d as i32);
            Ok(Corollary2Row {
                k,
                scaled,
                bound,
                below: scaled < bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut threshold_k = None;
    for row in rows.iter().rev() {
        if !row.below {
            break;
        }
        threshold_k = Some(row.k);
    }
    Ok(Corollary2Scan {
        rows,
        threshold_k,
        caveat: SUBSTITUTION_CAVEAT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn dims_formula_and_condition() {
        let dims = GrassmannDims::new(2, 3, 2).unwrap();
        assert_eq!((dims.n_k, dims.r_k), (5, 3));
        assert_eq!(dims.grassmannian_dim(), 6);
        assert_eq!(
            GrassmannDims::new(2, 3, 4).unwrap_err(),
            Error::DimsViolation {
                k: 3,
                genus: 2,
                d: 4
            }
        );
        assert!(GrassmannDims::new(3, 3, 7).is_ok());
        let origin = ChartMatrix::<f64>::origin(&dims);
        assert_eq!((origin.rows(), origin.cols()), (2, 3));
    }

    #[test]
    fn norm_examples() {
        let zero = ChartMatrix::<f64>::zeros(2, 3);
        let s = [c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.5)];
        let expected: f64 = s.iter().map(|v| v.norm_sqr()).sum();
        assert!((fs_norm_sq(&zero, &s).unwrap() - expected).abs() < 1e-14);

        let w = c(0.6, -1.1);
        let m = ChartMatrix::new(1, 1, vec![w]).unwrap();
        assert!((fs_norm_sq(&m, &[c(1.0, 0.0)]).unwrap() - (1.0 + w.norm_sqr())).abs() < 1e-14);
        assert!(matches!(
            fs_norm_sq(&m, &[c(1.0, 0.0), c(0.0, 0.0)]),
            Err(Error::DimensionMismatch {
                expected: 1,
                got: 2
            })
        ));
    }

    #[test]
    fn log_det_examples() {
        assert_eq!(fs_log_det(&ChartMatrix::<f64>::zeros(3, 2)), 0.0);
        let w = c(0.3, 0.4);
        let m = ChartMatrix::new(1, 1, vec![w]).unwrap();
        assert!((fs_log_det(&m) - (1.25f64).ln()).abs() < 1e-15);
    }

    #[test]
    fn fs_form_projective_line() {
        let m = ChartMatrix::<f64>::zeros(1, 1);
        let v = fs_form_fd(&m, 0, 0).unwrap();
        assert!((v.re - 1.0 / (2.0 * PI)).abs() < 1e-10);
        assert!(v.im.abs() < 1e-10);
        let w = c(0.7, -0.2);
        let m = ChartMatrix::new(1, 1, vec![w]).unwrap();
        let v = fs_form_fd(&m, 0, 0).unwrap();
        let expected = 1.0 / (2.0 * PI * (1.0 + w.norm_sqr()).powi(2));
        assert!((v.re - expected).abs() < 1e-9);
    }

    #[test]
    fn fs_form_is_hermitian() {
        let m = ChartMatrix::new(
            2,
            2,
            vec![c(0.1, 0.2), c(-0.4, 0.3), c(0.5, -0.1), c(0.2, 0.7)],
        )
        .unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let a = fs_form_fd(&m, i, j).unwrap();
                let b = fs_form_fd(&m, j, i).unwrap();
                assert!((a - b.conj()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn fs_form_errors() {
        let m = ChartMatrix::new(1, 1, vec![c(2e8, 0.0)]).unwrap();
        assert!(matches!(fs_form_fd(&m, 0, 0), Err(Error::StepUnderflow(_))));
        let m = ChartMatrix::<f64>::zeros(1, 2);
        assert_eq!(
            fs_form_fd(&m, 0, 2).unwrap_err(),
            Error::IndexOutOfRange { index: 2, len: 2 }
        );
        assert!(ChartMatrix::new(2, 2, vec![c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn sym_point_volume_density() {
        let i = HPoint::<f64>::i();
        let two_i = HPoint::new(0.0, 2.0).unwrap();
        assert_eq!(
            symd_hyp_volume_density(&SymPoint::new(vec![i]).unwrap()),
            1.0
        );
        let p = SymPoint::new(vec![i, two_i]).unwrap();
        let q = SymPoint::new(vec![two_i, i]).unwrap();
        assert_eq!(symd_hyp_volume_density(&p), 0.25);
        assert_eq!(p, q);
        assert!(SymPoint::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn identity_only_symd_outputs() {
        let e = ElementSet::<f64>::identity_only(2);
        let p = SymPoint::new(vec![HPoint::i(), HPoint::new(0.5, 2.0).unwrap()]).unwrap();
        let est = symd_fs_volume_estimate(&p, 5, &e).unwrap();
        assert!(est.value.abs() < 1e-20);
        assert_eq!(est.caveat, SUBSTITUTION_CAVEAT);
        let scan = corollary2_scan(&p, &[3, 6, 9], &e).unwrap();
        assert!(scan.rows.iter().all(|r| r.below && r.scaled < 1e-20));
        assert!(matches!(
            symd_fs_volume_estimate(&p, 2, &e),
            Err(Error::DimsViolation { k: 2, .. })
        ));
    }

    #[test]
    fn theorem2_product_structure() {
        let e = ElementSet::<f64>::identity_only(2);
        let z = HPoint::new(0.1, 0.9).unwrap();
        let single = theorem2_rhs(&SymPoint::new(vec![z]).unwrap(), 4, &e, 3.0).unwrap();
        let c_x = constant_cx(4, 3.0).unwrap();
        let kernel = bergman_kernel_x(z, 4, &e).unwrap().value.re;
        assert_eq!(
            single.to_bits(),
            theorem1_rhs(4, c_x, kernel).unwrap().to_bits()
        );
        let double = theorem2_rhs(&SymPoint::new(vec![z, z]).unwrap(), 4, &e, 3.0).unwrap();
        assert_eq!(double, single * single);
    }
}
