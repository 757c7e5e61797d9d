mod common;

use bernlab::bounds::{
    bennett_tail, bennett_tail_eps, bennett_tail_tau, norm_tail_bound_log, singularity_prediction, zero_rowcol_exact,
    zero_rowcol_exact_detailed, zero_rowcol_lower_bound, ZeroLineMethod,
};
use common::{rational_to_f64, zero_line_rational};
use proptest::prelude::*;
use statrs::distribution::{Binomial, DiscreteCDF};

#[test]
fn zero_line_against_rational_inclusion_exclusion() {
    for n in [1usize, 2, 3, 5, 8, 13, 21, 30] {
        for num in [1i64, 5, 10, 30, 50, 90] {
            let exact = rational_to_f64(&zero_line_rational(n, num, 100));
            let got = zero_rowcol_exact(n, num as f64 / 100.0).unwrap();
            assert!(
                (got - exact).abs() <= 1e-9 * exact.max(1e-300),
                "n={n} p={num}/100: {got} vs {exact}"
            );
        }
    }
}

#[test]
fn recursion_path_against_rational() {
    // Small p at moderate n forces heavy cancellation in the alternating sum.
    let n = 40;
    let exact = rational_to_f64(&zero_line_rational(n, 1, 2));
    let d = zero_rowcol_exact_detailed(n, 0.5).unwrap();
    assert!((d.value - exact).abs() <= 1e-9 * exact);
    let d = zero_rowcol_exact_detailed(200, 0.01).unwrap();
    assert_eq!(d.method, ZeroLineMethod::CoverageRecursion);
}

#[test]
fn exact_dominates_lower_bound_on_grid() {
    for n in (5..=200).step_by(5) {
        for k in 1..=6 {
            let p = k as f64 * (n as f64).ln() / n as f64;
            if p >= 1.0 {
                continue;
            }
            let exact = zero_rowcol_exact(n, p).unwrap();
            let lower = zero_rowcol_lower_bound(n, p);
            assert!(exact >= lower - 1e-15 * exact, "n={n} k={k}: {exact} < {lower}");
        }
    }
}

#[test]
fn bennett_dominates_binomial_tails() {
    for &(n, q) in &[(50u64, 0.1), (200, 0.3), (1000, 0.02), (80, 0.5), (300, 0.8)] {
        let b = Binomial::new(q, n).unwrap();
        let mean = q * n as f64;
        for step in 1..20 {
            let t = step as f64 * (n as f64 * q * (1.0 - q)).sqrt() / 3.0;
            let upper = b.sf((mean + t).floor() as u64);
            // P(S < x) for x = mean - t.
            let x = mean - t;
            let lower = if x <= 0.0 {
                0.0
            } else if x.fract() == 0.0 {
                b.cdf(x as u64 - 1)
            } else {
                b.cdf(x.floor() as u64)
            };
            let bound = bennett_tail(n, q, t).unwrap();
            assert!(upper <= bound * (1.0 + 1e-9), "upper n={n} q={q} t={t}");
            assert!(lower <= bound * (1.0 + 1e-9), "lower n={n} q={q} t={t}");
            if q <= 0.5 {
                let eps = t / n as f64;
                if eps > 0.0 && eps <= q {
                    assert!(upper <= bennett_tail_eps(n, q, eps).unwrap() * (1.0 + 1e-9));
                }
            }
        }
        if q <= 0.5 {
            for tau in [3.0, 5.0, 9.0] {
                let upper = b.sf(((tau + 1.0) * mean).floor() as u64);
                assert!(upper <= bennett_tail_tau(n, q, tau).unwrap() * (1.0 + 1e-9));
            }
        }
    }
}

#[test]
fn ratio_to_prediction_approaches_one() {
    let n = 500;
    let p = 3.0 * (n as f64).ln() / n as f64;
    let exact = zero_rowcol_exact(n, p).unwrap();
    let lower = zero_rowcol_lower_bound(n, p);
    assert!(lower > 0.0 && lower <= exact);
    let ratio = exact / singularity_prediction(n, p);
    assert!((0.99..=1.01).contains(&ratio), "{ratio}");
    let n = 1000;
    let p = 4.0 * (n as f64).ln() / n as f64;
    let ratio = zero_rowcol_exact(n, p).unwrap() / singularity_prediction(n, p);
    assert!((0.995..=1.005).contains(&ratio), "{ratio}");
    assert!(zero_rowcol_exact(1001, p).is_err());
}

#[test]
fn norm_bound_plug_in() {
    let log = norm_tail_bound_log(500, 0.05, 30.0).unwrap();
    assert!((log - (4f64.ln() - 5625.0)).abs() < 1e-9);
}

proptest! {
    #[test]
    fn zero_line_is_monotone_in_p(n in 2usize..120, a in 0.001f64..0.99, b in 0.001f64..0.99) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let x = zero_rowcol_exact(n, lo).unwrap();
        let y = zero_rowcol_exact(n, hi).unwrap();
        prop_assert!(y <= x * (1.0 + 1e-9) + 1e-300);
        prop_assert!((0.0..=1.0).contains(&x));
    }
}
