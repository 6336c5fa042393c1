//! Goodness-of-fit between an observed and an expected run-length
//! distribution: bin, rescale, chi-square.

use alloc::vec::Vec;

use crate::error::GofError;
use crate::runstats::RunDistribution;

/// Outcome of a test at a fixed significance level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    /// Rejects when the p-value falls strictly below the significance level.
    pub fn decide(p_value: f64, significance: f64) -> Verdict {
        if p_value >= significance {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Accept => "Accept",
            Verdict::Reject => "Reject",
        }
    }
}

/// Run-length histograms reduced to comparable bins.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedRuns {
    pub observed: Vec<f64>,
    pub expected: Vec<f64>,
    /// Inclusive length ranges; `None` upper edge means open-ended.
    pub edges: Vec<(u64, Option<u64>)>,
    /// True when the expected-count floor forced an early tail merge.
    pub cutoff_applied: bool,
}

/// Minimum rescaled expected count per bin; lower bins merge into the tail.
const EXPECTED_FLOOR: f64 = 5.0;

/// Bins both distributions into width-`width` length classes
/// `[1..=w], [w+1..=2w], ...` over their complete runs.
///
/// Expected counts are first rescaled so both histograms carry the observed
/// total mass. Scanning the bins in order, the first bin whose rescaled
/// expected count falls below 5 starts a single open-ended tail holding
/// everything from there on; if none does, the last bin becomes the tail.
pub fn bin_runs(
    observed: &RunDistribution,
    expected: &RunDistribution,
    width: u64,
) -> Result<BinnedRuns, GofError> {
    if width == 0 {
        return Err(GofError::BadWidth { width });
    }
    let obs_total = observed.n_complete();
    let exp_total = expected.n_complete();
    if obs_total == 0 {
        return Err(GofError::EmptyObserved);
    }
    if exp_total == 0 {
        return Err(GofError::EmptyExpected);
    }
    let factor = obs_total as f64 / exp_total as f64;

    let max_complete = |d: &RunDistribution| {
        d.complete_counts().keys().next_back().copied().unwrap_or(0)
    };
    let r_max = max_complete(observed).max(max_complete(expected));

    let range_count = |d: &RunDistribution, lo: u64, hi: u64| -> f64 {
        d.complete_counts().range(lo..=hi).map(|(_, &n)| n as f64).sum()
    };

    let mut out = BinnedRuns {
        observed: Vec::new(),
        expected: Vec::new(),
        edges: Vec::new(),
        cutoff_applied: false,
    };
    let mut lo = 1u64;
    while lo <= r_max {
        let hi = lo + (width - 1);
        let e = factor * range_count(expected, lo, hi);
        let last = hi >= r_max;
        if e < EXPECTED_FLOOR || last {
            // Tail: everything from lo upward, in one open-ended bin.
            out.observed.push(
                observed.count_at_least(lo) as f64,
            );
            out.expected.push(factor * expected.count_at_least(lo) as f64);
            out.edges.push((lo, None));
            out.cutoff_applied = e < EXPECTED_FLOOR;
            break;
        }
        out.observed.push(range_count(observed, lo, hi));
        out.expected.push(e);
        out.edges.push((lo, Some(hi)));
        lo = hi + 1;
    }
    Ok(out)
}

/// Mean squared difference between paired bin counts.
pub fn mse(observed: &[f64], expected: &[f64]) -> f64 {
    debug_assert_eq!(observed.len(), expected.len());
    if observed.is_empty() {
        return 0.0;
    }
    let sum: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o - e) * (o - e))
        .sum();
    sum / observed.len() as f64
}

/// Chi-square test outcome over `k` bins at `df = k - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofReport {
    pub chi2: f64,
    pub df: u64,
    pub p_value: f64,
    pub significance: f64,
    pub verdict: Verdict,
    pub mse: f64,
    pub k: usize,
}

/// Pearson chi-square over pre-binned counts.
pub fn chi_squared(binned: &BinnedRuns, significance: f64) -> Result<GofReport, GofError> {
    if !significance.is_finite() || significance <= 0.0 || significance >= 1.0 {
        return Err(GofError::BadSignificance { value: significance });
    }
    let k = binned.observed.len();
    let mut chi2 = 0.0f64;
    for (bin, (&o, &e)) in binned.observed.iter().zip(&binned.expected).enumerate() {
        if e == 0.0 {
            return Err(GofError::ZeroExpectedBin { bin });
        }
        chi2 += (o - e) * (o - e) / e;
    }
    let df = (k - 1) as u64;
    let p_value = chi2_survival(chi2, df);
    Ok(GofReport {
        chi2,
        df,
        p_value,
        significance,
        verdict: Verdict::decide(p_value, significance),
        mse: mse(&binned.observed, &binned.expected),
        k,
    })
}

/// Bins and tests in one step, returning the bins alongside the verdict.
pub fn compare_distributions(
    observed: &RunDistribution,
    expected: &RunDistribution,
    width: u64,
    significance: f64,
) -> Result<(BinnedRuns, GofReport), GofError> {
    let binned = bin_runs(observed, expected, width)?;
    let report = chi_squared(&binned, significance)?;
    Ok((binned, report))
}

/// Bins and tests in one step.
pub fn compare(
    observed: &RunDistribution,
    expected: &RunDistribution,
    width: u64,
    significance: f64,
) -> Result<GofReport, GofError> {
    compare_distributions(observed, expected, width, significance).map(|(_, r)| r)
}

/// Upper tail probability of the chi-square distribution with `df` degrees
/// of freedom.
///
/// Zero degrees of freedom arise when merging left a single bin; the
/// distributions then agree trivially and the tail is 1 (0 if a nonzero
/// statistic was somehow produced).
pub fn chi2_survival(chi2: f64, df: u64) -> f64 {
    if df == 0 {
        return if chi2.abs() <= 1e-9 { 1.0 } else { 0.0 };
    }
    if chi2 <= 0.0 {
        return 1.0;
    }
    regularized_gamma_q(df as f64 / 2.0, chi2 / 2.0)
}

/// ln Gamma(x) for x > 0, Lanczos approximation (g = 7, 9 terms).
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    const LN_SQRT_TWO_PI: f64 = 0.918_938_533_204_672_7;
    debug_assert!(x > 0.0);
    let z = x - 1.0;
    let mut sum = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + 7.5;
    LN_SQRT_TWO_PI + (z + 0.5) * libm::log(t) - t + libm::log(sum)
}

/// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0.
fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let log_prefix = a * libm::log(x) - x - ln_gamma(a);
    if x < a + 1.0 {
        // Lower series converges fast here; Q = 1 - P.
        let mut term = 1.0 / a;
        let mut sum = term;
        for n in 1..500 {
            term *= x / (a + n as f64);
            sum += term;
            if term < sum * 1e-16 {
                break;
            }
        }
        1.0 - sum * libm::exp(log_prefix)
    } else {
        // Continued fraction (modified Lentz) for the upper tail.
        const FPMIN: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / FPMIN;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = b + an / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 3e-16 {
                break;
            }
        }
        libm::exp(log_prefix) * h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(pairs: &[(u64, u64)]) -> RunDistribution {
        RunDistribution::from_counts(pairs.iter().copied())
    }

    #[test]
    fn critical_value_tail_matches_erfc() {
        // One degree of freedom: Q(x) = erfc(sqrt(x/2)).
        for &x in &[0.5, 1.0, 2.0, 3.841, 6.635, 10.83] {
            let oracle = libm::erfc(libm::sqrt(x / 2.0));
            let got = chi2_survival(x, 1);
            assert!((got - oracle).abs() < 1e-12, "x={x}: {got} vs {oracle}");
        }
        assert!((chi2_survival(3.841, 1) - 0.0500).abs() < 5e-4);
    }

    #[test]
    fn even_df_tail_matches_finite_sum() {
        // Even df = 2n: Q(x) = exp(-x/2) * sum_{k<n} (x/2)^k / k!.
        for &df in &[2u64, 4, 6, 10] {
            for &x in &[0.3, 1.7, 3.3, 9.1, 25.0] {
                let half = x / 2.0;
                let mut term = 1.0;
                let mut sum = 1.0;
                for k in 1..df / 2 {
                    term *= half / k as f64;
                    sum += term;
                }
                let oracle = libm::exp(-half) * sum;
                let got = chi2_survival(x, df);
                assert!((got - oracle).abs() < 1e-12, "df={df} x={x}: {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn three_df_tail_matches_closed_form() {
        // Q(x; 3) = erfc(sqrt(y)) + 2 sqrt(y/pi) exp(-y), y = x/2.
        const PI: f64 = core::f64::consts::PI;
        for &x in &[0.7, 2.0, 7.815, 16.27] {
            let y = x / 2.0;
            let oracle = libm::erfc(libm::sqrt(y)) + 2.0 * libm::sqrt(y / PI) * libm::exp(-y);
            let got = chi2_survival(x, 3);
            assert!((got - oracle).abs() < 1e-12, "x={x}: {got} vs {oracle}");
        }
    }

    #[test]
    fn tail_probability_edge_cases() {
        assert_eq!(chi2_survival(0.0, 0), 1.0);
        assert_eq!(chi2_survival(1e-10, 0), 1.0);
        assert_eq!(chi2_survival(0.5, 0), 0.0);
        assert_eq!(chi2_survival(0.0, 5), 1.0);
        assert_eq!(chi2_survival(-1.0, 5), 1.0);
        // Monotone in the statistic, increasing in df.
        assert!(chi2_survival(4.0, 2) < chi2_survival(3.0, 2));
        assert!(chi2_survival(5.0, 6) > chi2_survival(5.0, 2));
        // Deep tail underflows gracefully towards zero.
        let deep = chi2_survival(400.0, 3);
        assert!(deep > 0.0 && deep < 1e-80);
    }

    #[test]
    fn binning_rescales_then_applies_floor() {
        let obs = dist(&[(1, 10), (2, 7), (3, 2)]);
        let exp = dist(&[(1, 60), (2, 25), (3, 10), (4, 5)]);
        let b = bin_runs(&obs, &exp, 1).unwrap();
        // Factor 19/100; the length-2 bin rescales to 4.75 and opens the
        // tail.
        assert_eq!(b.edges, [(1, Some(1)), (2, None)]);
        assert!(b.cutoff_applied);
        assert_eq!(b.observed, [10.0, 9.0]);
        assert!((b.expected[0] - 11.4).abs() < 1e-9);
        assert!((b.expected[1] - 7.6).abs() < 1e-9);
        let so: f64 = b.observed.iter().sum();
        let se: f64 = b.expected.iter().sum();
        assert!((so - 19.0).abs() < 1e-9);
        assert!((se - 19.0).abs() < 1e-9);
    }

    #[test]
    fn width_five_natural_bins() {
        let obs = dist(&[(1, 30), (3, 20), (7, 12), (12, 6)]);
        let exp = dist(&[(1, 25), (2, 25), (7, 10), (12, 8)]);
        let b = bin_runs(&obs, &exp, 5).unwrap();
        assert_eq!(b.edges, [(1, Some(5)), (6, Some(10)), (11, None)]);
        assert!(!b.cutoff_applied);
        assert_eq!(b.observed, [50.0, 12.0, 6.0]);
        assert_eq!(b.expected, [50.0, 10.0, 8.0]);
    }

    #[test]
    fn identical_distributions_accept_with_zero_statistic() {
        let d = dist(&[(1, 100), (2, 50), (3, 25), (4, 12), (5, 6), (6, 3)]);
        let (b, r) = compare_distributions(&d, &d, 1, 0.05).unwrap();
        assert_eq!(b.edges.last().unwrap(), &(6, None));
        assert!(b.cutoff_applied);
        assert_eq!(r.chi2, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.verdict, Verdict::Accept);
        assert_eq!(r.mse, 0.0);
        assert_eq!(r.k, 6);
        assert_eq!(r.df, 5);
    }

    #[test]
    fn hand_computed_statistic() {
        let obs = dist(&[(1, 8), (2, 16)]);
        let exp = dist(&[(1, 12), (2, 12)]);
        let r = compare(&obs, &exp, 1, 0.05).unwrap();
        assert_eq!(r.k, 2);
        assert_eq!(r.df, 1);
        assert!((r.chi2 - 8.0 / 3.0).abs() < 1e-12);
        assert!((r.p_value - 0.10247).abs() < 1e-4);
        assert_eq!(r.verdict, Verdict::Accept);
        // (16 + 16) / 2
        assert!((r.mse - 16.0).abs() < 1e-12);
        assert_eq!(compare(&obs, &exp, 1, 0.11).unwrap().verdict, Verdict::Reject);
    }

    #[test]
    fn single_bin_comparison_is_trivially_accepted() {
        let obs = dist(&[(1, 3)]);
        let exp = dist(&[(1, 7)]);
        let (b, r) = compare_distributions(&obs, &exp, 1, 0.05).unwrap();
        assert_eq!(b.edges, [(1, None)]);
        assert!(b.cutoff_applied);
        assert_eq!(r.k, 1);
        assert_eq!(r.df, 0);
        assert!(r.chi2.abs() < 1e-9);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.verdict, Verdict::Accept);
    }

    #[test]
    fn observed_mass_beyond_expected_support_is_an_error() {
        let obs = dist(&[(1, 10), (50, 10)]);
        let exp = dist(&[(1, 20)]);
        let err = compare(&obs, &exp, 1, 0.05).unwrap_err();
        assert_eq!(err, GofError::ZeroExpectedBin { bin: 1 });
    }

    #[test]
    fn input_validation() {
        let d = dist(&[(1, 10)]);
        assert_eq!(bin_runs(&d, &d, 0), Err(GofError::BadWidth { width: 0 }));
        let empty = RunDistribution::default();
        assert_eq!(bin_runs(&empty, &d, 1), Err(GofError::EmptyObserved));
        assert_eq!(bin_runs(&d, &empty, 1), Err(GofError::EmptyExpected));
        for bad in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(
                compare(&d, &d, 1, bad),
                Err(GofError::BadSignificance { .. })
            ));
        }
    }

    #[test]
    fn verdict_boundary_is_accept() {
        assert_eq!(Verdict::decide(0.05, 0.05), Verdict::Accept);
        assert_eq!(Verdict::decide(0.049999, 0.05), Verdict::Reject);
        assert_eq!(Verdict::Accept.as_str(), "Accept");
        assert_eq!(Verdict::Reject.as_str(), "Reject");
    }

    #[test]
    fn mass_is_preserved_under_fuzzed_binning() {
        let mut rng = crate::rng::rng_stream(77, 92);
        for _ in 0..300 {
            let n_obs = 1 + rng.next_index(8);
            let n_exp = 1 + rng.next_index(8);
            let mk = |rng: &mut crate::rng::RngStream, n: usize| {
                RunDistribution::from_counts((0..n).map(|_| {
                    (1 + rng.next_index(30) as u64, 1 + rng.next_index(40) as u64)
                }))
            };
            let obs = mk(&mut rng, n_obs);
            let exp = mk(&mut rng, n_exp);
            for width in [1u64, 2, 5, 10] {
                let b = bin_runs(&obs, &exp, width).unwrap();
                let so: f64 = b.observed.iter().sum();
                let se: f64 = b.expected.iter().sum();
                let total = obs.n_complete() as f64;
                assert!((so - total).abs() < 1e-9);
                assert!((se - total).abs() < 1e-6);
                // Every non-tail bin respects the floor.
                for (i, &e) in b.expected.iter().enumerate() {
                    if i + 1 < b.expected.len() {
                        assert!(e >= EXPECTED_FLOOR);
                    }
                }
                // Edges tile the lengths contiguously from 1.
                let mut next = 1u64;
                for &(lo, hi) in &b.edges {
                    assert_eq!(lo, next);
                    match hi {
                        Some(h) => next = h + 1,
                        None => next = u64::MAX,
                    }
                }
                assert_eq!(next, u64::MAX);
            }
        }
    }
}
