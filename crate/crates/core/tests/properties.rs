use bergman_core::grassmann::{fs_log_det, fs_norm_sq, ChartMatrix};
use bergman_core::hyperbolic::{
    cosh_sq_half_distance, hyp_distance, hyp_metric_density, mobius_apply, HPoint, Mobius,
};
use num_complex::Complex;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = HPoint<f64>> {
    (-5.0..5.0f64, 0.05..5.0f64).prop_map(|(x, y)| HPoint::new(x, y).unwrap())
}

/// Products of a translation, a dilation and a rotation about `i`, which
/// reach every element of PSL(2,R) with moderate entries.
fn mobius() -> impl Strategy<Value = Mobius<f64>> {
    (-3.0..3.0f64, -1.5..1.5f64, 0.0..std::f64::consts::PI).prop_map(|(t, s, th)| {
        let tr = Mobius::new(1.0, t, 0.0, 1.0).unwrap();
        let e = (s / 2.0).exp();
        let dil = Mobius::new(e, 0.0, 0.0, 1.0 / e).unwrap();
        let (sn, cs) = (th / 2.0).sin_cos();
        let rot = Mobius::new(cs, sn, -sn, cs).unwrap();
        tr * dil * rot
    })
}

fn chart(rows: usize, cols: usize) -> impl Strategy<Value = ChartMatrix<f64>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), rows * cols).prop_map(move |v| {
        ChartMatrix::new(
            rows,
            cols,
            v.into_iter().map(|(a, b)| Complex::new(a, b)).collect(),
        )
        .unwrap()
    })
}

/// `U M V*` for a unitary `U` acting on rows and `V` on columns, each a
/// product of a phase and a plane rotation in the first two coordinates.
fn rotate(m: &ChartMatrix<f64>, theta_rows: f64, theta_cols: f64, phase: f64) -> ChartMatrix<f64> {
    let unitary = |n: usize, th: f64, ph: f64| {
        let mut u = vec![Complex::new(0.0, 0.0); n * n];
        for i in 0..n {
            u[i * n + i] = Complex::new(1.0, 0.0);
        }
        if n >= 2 {
            let (s, c) = th.sin_cos();
            let p = Complex::from_polar(1.0, ph);
            u[0] = p * c;
            u[1] = -p * s;
            u[n] = Complex::new(s, 0.0);
            u[n + 1] = Complex::new(c, 0.0);
        } else {
            u[0] = Complex::from_polar(1.0, ph);
        }
        u
    };
    let (r, c) = (m.rows(), m.cols());
    let u = unitary(r, theta_rows, phase);
    let v = unitary(c, theta_cols, -0.5 * phase);
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            let mut acc = Complex::new(0.0, 0.0);
            for a in 0..r {
                for b in 0..c {
                    acc += u[i * r + a] * m.get(a, b) * v[j * c + b].conj();
                }
            }
            out.push(acc);
        }
    }
    ChartMatrix::new(r, c, out).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distance_is_a_metric(z in point(), w in point(), u in point()) {
        let dzw = hyp_distance(z, w);
        prop_assert!(dzw >= 0.0);
        prop_assert!((dzw - hyp_distance(w, z)).abs() <= 1e-12 * dzw.max(1.0));
        prop_assert!(hyp_distance(z, z) <= 1e-7);
        prop_assert!(dzw <= hyp_distance(z, u) + hyp_distance(u, w) + 1e-9);
    }

    #[test]
    fn mobius_maps_are_isometries(g in mobius(), z in point(), w in point()) {
        let d = hyp_distance(z, w);
        let dg = hyp_distance(mobius_apply(&g, z), mobius_apply(&g, w));
        prop_assert!((d - dg).abs() <= 1e-7 * d.max(1.0));
    }

    #[test]
    fn action_stays_in_half_plane_and_composes(g in mobius(), h in mobius(), z in point()) {
        let gz = mobius_apply(&g, z);
        prop_assert!(gz.y() > 0.0);
        let lhs = mobius_apply(&(g * h), z);
        let rhs = mobius_apply(&g, mobius_apply(&h, z));
        prop_assert!(hyp_distance(lhs, rhs) <= 1e-7);
        prop_assert!(((g * h).det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_distance_identity(z in point(), w in point()) {
        let c = (hyp_distance(z, w) / 2.0).cosh();
        let c2 = cosh_sq_half_distance(z, w);
        prop_assert!((c * c - c2).abs() <= 1e-9 * c2);
    }

    #[test]
    fn area_density_is_invariant(g in mobius(), z in point()) {
        // |g'(z)|^2 = 1/|cz+d|^4 pulls back y^-2 to itself.
        let den = z.z() * g.c() + g.d();
        let pulled = hyp_metric_density(mobius_apply(&g, z)) / den.norm_sqr().powi(2);
        let base = hyp_metric_density(z);
        prop_assert!((pulled - base).abs() <= 1e-9 * base);
    }

    #[test]
    fn gram_norm_dominates_euclidean(m in chart(3, 2), s in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 2)) {
        let s: Vec<_> = s.into_iter().map(|(a, b)| Complex::new(a, b)).collect();
        let e: f64 = s.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!(fs_norm_sq(&m, &s).unwrap() >= e - 1e-12);
        prop_assert!(fs_log_det(&m) >= -1e-14);
    }

    #[test]
    fn log_det_unitary_invariance(m in chart(3, 2), tr in 0.0..6.3f64, tc in 0.0..6.3f64, ph in 0.0..6.3f64) {
        let rotated = rotate(&m, tr, tc, ph);
        let a = fs_log_det(&m);
        prop_assert!((a - fs_log_det(&rotated)).abs() <= 1e-11 * a.max(1.0));
    }
}
