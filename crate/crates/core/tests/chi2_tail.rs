//! Checks the chi-square upper tail against direct numerical integration of
//! the density, with the normalizing gamma evaluated exactly at integer and
//! half-integer arguments.

use idschan_core::chi2_survival;

fn factorial(n: u64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Gamma(k/2): (k/2 - 1)! for even k, (2m)! sqrt(pi) / (4^m m!) for odd
/// k = 2m + 1.
fn gamma_half(k: u64) -> f64 {
    if k.is_multiple_of(2) {
        factorial(k / 2 - 1)
    } else {
        let m = (k - 1) / 2;
        factorial(2 * m) / (4f64.powi(m as i32) * factorial(m))
            * std::f64::consts::PI.sqrt()
    }
}

fn density(x: f64, k: u64) -> f64 {
    let a = k as f64 / 2.0;
    x.powf(a - 1.0) * (-x / 2.0).exp() / (2f64.powf(a) * gamma_half(k))
}

/// Simpson's rule over [x0, x0 + 250]; the integrand decays like exp(-x/2),
/// so the truncated mass is far below the comparison tolerance.
fn tail_by_integration(x0: f64, k: u64) -> f64 {
    let span = 250.0;
    let n = 200_000usize;
    let h = span / n as f64;
    let mut acc = density(x0, k) + density(x0 + span, k);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * density(x0 + i as f64 * h, k);
    }
    acc * h / 3.0
}

#[test]
fn tail_matches_numerical_integration() {
    for &df in &[1u64, 2, 3, 4, 5, 8, 12, 40] {
        for &x in &[0.5f64, 2.0, 5.0, 10.0, 25.0] {
            let oracle = tail_by_integration(x, df);
            let got = chi2_survival(x, df);
            assert!((got - oracle).abs() < 1e-6, "df={df} x={x}: {got} vs {oracle}");
        }
    }
}

#[test]
fn common_critical_values() {
    for &(x, df) in &[(3.841f64, 1u64), (5.991, 2), (7.815, 3), (9.488, 4)] {
        let p = chi2_survival(x, df);
        assert!((p - 0.05).abs() < 2e-4, "df={df}: p={p}");
    }
}
