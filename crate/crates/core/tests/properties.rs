use std::f64::consts::PI;

use bsfs_core::dist::{limit_conditional_surv, surv_length_large_family};
use bsfs_core::moments::{cov_sfs, l1, l2, l3};
use bsfs_core::quad::{integrate_1d, integrate_square, integrate_triangle};
use bsfs_core::simulate::{sample_tree, trajectory};
use bsfs_core::specfun::{digamma_diff, lgamma_ratio, log_gamma, sinc_pi};
use bsfs_core::{PairQuery, QuadratureSpec, SecondMomentMode};
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn reflection(p in 0.01f64..0.99) {
        let v = (log_gamma(1.0 - p).unwrap() + log_gamma(1.0 + p).unwrap()).exp() * sinc_pi(p);
        prop_assert!((v - 1.0).abs() < 1e-12, "p = {p}: {v}");
    }

    #[test]
    fn recurrence(x in 0.1f64..1e6) {
        let hi = log_gamma(x + 1.0).unwrap();
        let d = hi - log_gamma(x).unwrap() - x.ln();
        prop_assert!(d.abs() <= 1e-12 * hi.abs().max(1.0), "x = {x}: {d}");
        prop_assert!((lgamma_ratio(x, 1.0) - x.ln()).abs() <= 1e-12 * x.ln().abs().max(1.0));
    }

    #[test]
    fn digamma_diff_increasing(b in 1u64..50_000, p in 0.0f64..0.98, dp in 0.001f64..0.02) {
        let here = digamma_diff(b, p).unwrap();
        prop_assert!(digamma_diff(b + 1, p).unwrap() > here);
        prop_assert!(digamma_diff(b, p + dp).unwrap() > here);
    }

    #[test]
    fn quadrature_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -4.0f64..4.0, k in 0.0f64..6.0) {
        let s = spec();
        let f = |p: f64| (c * p).exp();
        let g = |p: f64| (k * p).cos() + p * p;
        let rf = integrate_1d(f, &s).unwrap();
        let rg = integrate_1d(g, &s).unwrap();
        let rh = integrate_1d(|p| a * f(p) + b * g(p), &s).unwrap();
        let slack = a.abs() * rf.error_estimate + b.abs() * rg.error_estimate + rh.error_estimate + 1e-14;
        prop_assert!((rh.value - a * rf.value - b * rg.value).abs() <= slack + 1e-13 * rh.value.abs());
    }

    #[test]
    fn triangle_plus_swap_is_square(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, c3 in 0.0f64..3.0) {
        let s = spec();
        let f = |x: f64, y: f64| (c1 * x + c2 * y).exp() * (1.0 + c3 * x * y * y);
        let lower = integrate_triangle(f, &s).unwrap();
        let upper = integrate_triangle(|x, y| f(y, x), &s).unwrap();
        let square = integrate_square(f, &s).unwrap();
        let slack = lower.error_estimate + upper.error_estimate + square.error_estimate;
        prop_assert!((lower.value + upper.value - square.value).abs() <= slack + 1e-10 * square.value.abs());
    }
}

proptest! {
    #![proptest_config(config(40))]

    #[test]
    fn moment_integrals_positive(n in 2u64..80, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let s = spec();
        let b1 = 1 + (x * (n - 1) as f64) as u64 % (n - 1);
        let b2 = b1 + (y * (n - b1) as f64) as u64 % (n - b1);
        prop_assert!(l1(n, b1, &s).unwrap() > 0.0);
        prop_assert!(l2(n, b1, b2, &s).unwrap() > 0.0);
        let v3 = l3(n, b1, b2, &s).unwrap();
        if b1 + b2 <= n {
            prop_assert!(v3 > 0.0);
        } else {
            prop_assert_eq!(v3, 0.0);
        }
    }

    #[test]
    fn covariance_symmetric(n in 3u64..40, x in 0.0f64..1.0, y in 0.0f64..1.0, theta in 0.1f64..5.0) {
        let s = spec();
        let b1 = 1 + (x * (n - 1) as f64) as u64 % (n - 1);
        let b2 = 1 + (y * (n - 1) as f64) as u64 % (n - 1);
        let q12 = PairQuery::new(n, theta, b1, b2).unwrap();
        let q21 = PairQuery::new(n, theta, b2, b1).unwrap();
        prop_assert_eq!(&q12, &q21);
        let c12 = cov_sfs(&q12, SecondMomentMode::DiagonalDoubled, &s).unwrap();
        let c21 = cov_sfs(&q21, SecondMomentMode::DiagonalDoubled, &s).unwrap();
        prop_assert_eq!(c12, c21);
    }

    #[test]
    fn survival_decreasing_in_s(n in 3u64..200, x in 0.0f64..1.0, s0 in 0.0f64..3.0, ds in 0.01f64..1.0) {
        let b = n / 2 + 1 + (x * (n - n / 2 - 1) as f64) as u64 % (n - n / 2 - 1);
        let here = surv_length_large_family(n, b, s0, &spec()).unwrap();
        let later = surv_length_large_family(n, b, s0 + ds, &spec()).unwrap();
        prop_assert!((0.0..=1.0).contains(&here));
        prop_assert!(later < here, "n={n} b={b} s={s0}: {later} !< {here}");
    }

    #[test]
    fn conditional_limit_decreasing(u in 0.5f64..0.999, s0 in 0.0f64..5.0, ds in 0.01f64..1.0) {
        let here = limit_conditional_surv(u, s0).unwrap();
        prop_assert!(limit_conditional_surv(u, s0 + ds).unwrap() < here);
        prop_assert!(here <= 1.0);
    }

    #[test]
    fn trajectory_conserves_mass(n in 2usize..300, seed in any::<u64>()) {
        let path = trajectory(&sample_tree(n, seed));
        prop_assert!(path.events.len() < n);
        for counts in &path.counts {
            let mass: usize = counts.iter().enumerate().map(|(b, &c)| b * c as usize).sum();
            prop_assert_eq!(mass, n);
        }
        let last = path.counts.last().unwrap();
        prop_assert_eq!(last[n], 1);
    }
}

/// Midpoint rule with `10^7` points, summed in blocks to limit rounding.
fn midpoint(f: impl Fn(f64) -> f64) -> f64 {
    let m = 10_000_000usize;
    let h = 1.0 / m as f64;
    (0..1000)
        .map(|blk| {
            (0..m / 1000)
                .map(|j| f(((blk * (m / 1000) + j) as f64 + 0.5) * h))
                .sum::<f64>()
        })
        .sum::<f64>()
        * h
}

#[test]
fn tightening_tolerance_never_worsens_accuracy() {
    let integrands: [fn(f64) -> f64; 3] = [|p| (PI * p).sin() / PI, |_| 1.0, |p| (1.0 + p) / 2.0];
    for f in integrands {
        let oracle = midpoint(f);
        let mut previous = f64::INFINITY;
        let mut tol = 1e-2;
        while tol >= 1e-12 {
            let r = integrate_1d(f, &QuadratureSpec::with_tolerances(tol, 1e-14)).unwrap();
            let d = (r.value - oracle).abs();
            // Both sides sit at the oracle's own rounding floor once converged.
            assert!(d <= previous + 1e-14, "tol {tol}: {d} > {previous}");
            previous = d;
            tol /= 2.0;
        }
    }
}
