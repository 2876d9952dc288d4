//! Property tests for the numeric kernels: the log-polar arithmetic must
//! agree with plain complex arithmetic wherever the latter is representable,
//! and the indexed disc queries must agree with brute force on arbitrary
//! configurations.

use num_complex::Complex64;
use proptest::prelude::*;
use rwspace::geometry::{Coverage, PointSet};
use rwspace::logcx::{log_one_minus_exp, wrap_angle, LogComplex};
use rwspace::weight::RadialWeight;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn logcx_mul_matches_complex(
        re1 in -5.0f64..5.0, im1 in -5.0f64..5.0,
        re2 in -5.0f64..5.0, im2 in -5.0f64..5.0,
    ) {
        let a = Complex64::new(re1, im1);
        let b = Complex64::new(re2, im2);
        let la = LogComplex::from_complex(a);
        let lb = LogComplex::from_complex(b);
        let prod = la.mul(&lb).to_complex();
        let want = a * b;
        prop_assert!(close(prod.re, want.re, 1e-12) && close(prod.im, want.im, 1e-12));
    }

    #[test]
    fn logcx_add_matches_complex(
        re1 in -5.0f64..5.0, im1 in -5.0f64..5.0,
        re2 in -5.0f64..5.0, im2 in -5.0f64..5.0,
    ) {
        let a = Complex64::new(re1, im1);
        let b = Complex64::new(re2, im2);
        let sum = LogComplex::from_complex(a).add(&LogComplex::from_complex(b)).to_complex();
        let want = a + b;
        prop_assert!(close(sum.re, want.re, 1e-12) && close(sum.im, want.im, 1e-12));
    }

    #[test]
    fn wrap_angle_stays_in_range(a in -1e6f64..1e6) {
        let w = wrap_angle(a);
        prop_assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
        // and wraps by full turns
        let k = ((a - w) / (2.0 * std::f64::consts::PI)).round();
        prop_assert!(close(a, w + 2.0 * std::f64::consts::PI * k, 1e-9));
    }

    #[test]
    fn log_one_minus_exp_matches_direct(re in -20.0f64..20.0, im in -50.0f64..50.0) {
        // away from the zeros of 1 - e^u the direct formula is fine
        let reduced = wrap_angle(im);
        prop_assume!(re.abs() > 1e-3 || reduced.abs() > 1e-2);
        let direct = LogComplex::from_complex(
            Complex64::new(1.0, 0.0) - Complex64::new(re, im).exp(),
        );
        let got = log_one_minus_exp(re, im);
        prop_assert!(close(got.log_mag, direct.log_mag, 1e-9),
            "log_mag {} vs {}", got.log_mag, direct.log_mag);
        prop_assert!(wrap_angle(got.arg - direct.arg).abs() <= 1e-9);
    }

    #[test]
    fn disc_queries_match_brute_force(
        pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..120),
        cx in -8.0f64..8.0, cy in -8.0f64..8.0,
        rad in 0.1f64..6.0,
    ) {
        let beta = RadialWeight::beta();
        let points: Vec<Complex64> = pts.iter().map(|&(x, y)| Complex64::new(x, y)).collect();
        let set = PointSet::new(&beta, points.clone(), Coverage::full_disc(16.0));
        let c = Complex64::new(cx, cy);
        let mut got = set.query_disc(c, rad);
        got.sort_unstable();
        let want: Vec<usize> =
            (0..points.len()).filter(|&i| (points[i] - c).norm() < rad).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn d_rho_symmetric_positive(
        x1 in -5.0f64..5.0, y1 in -5.0f64..5.0,
        x2 in -5.0f64..5.0, y2 in -5.0f64..5.0,
    ) {
        let beta = RadialWeight::beta();
        let a = Complex64::new(x1, y1);
        let b = Complex64::new(x2, y2);
        let d1 = rwspace::geometry::d_rho(&beta, a, b).unwrap();
        let d2 = rwspace::geometry::d_rho(&beta, b, a).unwrap();
        prop_assert_eq!(d1, d2);
        prop_assert!(d1 >= 0.0);
        prop_assert_eq!(d1 == 0.0, a == b);
    }
}
