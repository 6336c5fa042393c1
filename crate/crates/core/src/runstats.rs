//! Run-length statistics of binary error sequences and the closed-form run
//! laws of single-error-state partitioned models.

use alloc::collections::BTreeMap;

use crate::error::ModelError;
use crate::model::MarkovModel;
use crate::seq::BinaryErrorSequence;

/// Which symbol's runs are being measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunKind {
    /// Maximal blocks of 0 between errors.
    ErrorFree,
    /// Maximal blocks of 1 (error bursts).
    Error,
}

impl RunKind {
    pub const ALL: [RunKind; 2] = [RunKind::ErrorFree, RunKind::Error];

    /// Tag used in file names and report columns.
    pub fn short_name(self) -> &'static str {
        match self {
            RunKind::ErrorFree => "efr",
            RunKind::Error => "er",
        }
    }

    fn target(self) -> u8 {
        match self {
            RunKind::ErrorFree => 0,
            RunKind::Error => 1,
        }
    }
}

/// Histogram of maximal run lengths.
///
/// A run counts only when its start is witnessed, i.e. the block is preceded
/// by the opposite symbol; the block before the first opposite symbol is
/// dropped. A block cut off by the end of the sequence is recorded as
/// censored: only a lower bound on its length was seen.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunDistribution {
    counts: BTreeMap<u64, u64>,
    censored: BTreeMap<u64, u64>,
}

impl RunDistribution {
    /// Builds a distribution of complete runs directly from (length, count)
    /// pairs. Zero lengths and zero counts are ignored.
    pub fn from_counts<I: IntoIterator<Item = (u64, u64)>>(pairs: I) -> Self {
        let mut dist = RunDistribution::default();
        for (len, n) in pairs {
            if len > 0 && n > 0 {
                *dist.counts.entry(len).or_insert(0) += n;
            }
        }
        dist
    }

    pub fn complete_counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn censored_counts(&self) -> &BTreeMap<u64, u64> {
        &self.censored
    }

    pub fn n_complete(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn n_censored(&self) -> u64 {
        self.censored.values().sum()
    }

    pub fn count_exact(&self, len: u64) -> u64 {
        self.counts.get(&len).copied().unwrap_or(0)
    }

    /// Number of complete runs of length at least `len`.
    pub fn count_at_least(&self, len: u64) -> u64 {
        self.counts.range(len..).map(|(_, &n)| n).sum()
    }

    /// Empirical probability that a run lasts at least `len`, among complete
    /// runs. Zero when there are no complete runs.
    pub fn survival(&self, len: u64) -> f64 {
        let total = self.n_complete();
        if total == 0 {
            return 0.0;
        }
        self.count_at_least(len) as f64 / total as f64
    }

    /// Longest length seen, complete or censored.
    pub fn max_len(&self) -> u64 {
        let a = self.counts.keys().next_back().copied().unwrap_or(0);
        let b = self.censored.keys().next_back().copied().unwrap_or(0);
        a.max(b)
    }

    /// Adds every run of `other` into `self`.
    pub fn merge(&mut self, other: &RunDistribution) {
        for (&len, &n) in &other.counts {
            *self.counts.entry(len).or_insert(0) += n;
        }
        for (&len, &n) in &other.censored {
            *self.censored.entry(len).or_insert(0) += n;
        }
    }

    /// Treats censored runs as complete, at their observed lower-bound
    /// length.
    pub fn with_censored_included(&self) -> RunDistribution {
        let mut out = self.clone();
        for (&len, &n) in &self.censored {
            *out.counts.entry(len).or_insert(0) += n;
        }
        out.censored.clear();
        out
    }
}

fn extract(bits: &[u8], target: u8) -> RunDistribution {
    let mut dist = RunDistribution::default();
    let mut i = 0usize;
    while i < bits.len() {
        if bits[i] != target {
            i += 1;
            continue;
        }
        let start = i;
        while i < bits.len() && bits[i] == target {
            i += 1;
        }
        if start == 0 {
            continue;
        }
        let len = (i - start) as u64;
        if i == bits.len() {
            *dist.censored.entry(len).or_insert(0) += 1;
        } else {
            *dist.counts.entry(len).or_insert(0) += 1;
        }
    }
    dist
}

/// Error-free runs: maximal 0-blocks following an error.
pub fn error_free_runs(seq: &BinaryErrorSequence) -> RunDistribution {
    extract(seq.bits(), 0)
}

/// Error runs: maximal 1-blocks following an error-free symbol.
pub fn error_runs(seq: &BinaryErrorSequence) -> RunDistribution {
    extract(seq.bits(), 1)
}

/// Pooled run distribution over independent segments. Runs never span a
/// segment boundary; each segment's leading block is dropped and its
/// trailing block censored, exactly as for a single sequence.
pub fn runs_segmented(segments: &[BinaryErrorSequence], kind: RunKind) -> RunDistribution {
    let mut total = RunDistribution::default();
    for seg in segments {
        total.merge(&extract(seg.bits(), kind.target()));
    }
    total
}

/// Integer power by repeated squaring, with `0^0 = 1`.
fn powu(base: f64, mut exp: u64) -> f64 {
    let mut acc = 1.0f64;
    let mut b = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= b;
        }
        b *= b;
        exp >>= 1;
    }
    acc
}

/// The model's single error state, or why it does not have one.
fn single_error_state(model: &MarkovModel) -> Result<usize, ModelError> {
    let Some(good) = model.good_count() else {
        return Err(ModelError::NotFritchman);
    };
    let bad = model.n_states() - good;
    if bad != 1 {
        return Err(ModelError::MultipleErrorStates { bad_count: bad });
    }
    Ok(model.n_states() - 1)
}

/// Probability that at least `m` error-free symbols follow an error, for a
/// partitioned model with a single error state e:
///
///   sum over good k of a[e][k] * a[k][k]^(m-1),   m >= 1
///
/// and 1 at m = 0. Exact under the partition zero pattern, where good states
/// reach each other only through the error state.
pub fn fritchman_efr_closed_form(model: &MarkovModel, m: u64) -> Result<f64, ModelError> {
    let e = single_error_state(model)?;
    if m == 0 {
        return Ok(1.0);
    }
    let a = model.transition();
    let mut p = 0.0;
    for k in 0..e {
        p += a.get(e, k) * powu(a.get(k, k), m - 1);
    }
    Ok(p)
}

/// Probability that an error burst lasts at least `m` symbols given it
/// started: a[e][e]^(m-1), which is 1 at m = 1.
pub fn fritchman_er_closed_form(model: &MarkovModel, m: u64) -> Result<f64, ModelError> {
    let e = single_error_state(model)?;
    if m == 0 {
        return Ok(1.0);
    }
    Ok(powu(model.transition().get(e, e), m - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{simulate_markov, InitialState};
    use crate::model::validate_transition_matrix;
    use crate::rng::rng_stream;
    use alloc::vec::Vec;

    fn bits(text: &str) -> BinaryErrorSequence {
        BinaryErrorSequence::parse(text).unwrap()
    }

    fn pairs(d: &BTreeMap<u64, u64>) -> Vec<(u64, u64)> {
        d.iter().map(|(&l, &n)| (l, n)).collect()
    }

    #[test]
    fn walkthrough_run_extraction() {
        // Any-error indicators of the worked 20-event path.
        let b = bits("00100001000010000010");
        let efr = error_free_runs(&b);
        assert_eq!(pairs(efr.complete_counts()), [(4, 2), (5, 1)]);
        assert_eq!(pairs(efr.censored_counts()), [(1, 1)]);
        assert_eq!(efr.n_complete(), 3);
        assert_eq!(efr.n_censored(), 1);

        let er = error_runs(&b);
        assert_eq!(pairs(er.complete_counts()), [(1, 4)]);
        assert!(er.censored_counts().is_empty());
    }

    #[test]
    fn run_edge_cases() {
        // No errors at all: nothing is witnessed in either direction.
        let b = bits("00");
        assert_eq!(error_free_runs(&b), RunDistribution::default());
        assert_eq!(error_runs(&b), RunDistribution::default());

        // Error then silence: the error-free block is censored; the error
        // block leads the sequence and is dropped.
        let b = bits("10");
        assert_eq!(pairs(error_free_runs(&b).censored_counts()), [(1, 1)]);
        assert!(error_free_runs(&b).complete_counts().is_empty());
        assert_eq!(error_runs(&b), RunDistribution::default());

        // Burst running into the end of the sequence is censored.
        let b = bits("011");
        assert_eq!(pairs(error_runs(&b).censored_counts()), [(2, 1)]);
        assert!(error_runs(&b).complete_counts().is_empty());
        assert_eq!(error_free_runs(&b), RunDistribution::default());

        assert_eq!(error_runs(&BinaryErrorSequence::default()), RunDistribution::default());
    }

    #[test]
    fn accessors_and_survival() {
        let d = RunDistribution::from_counts([(1, 8), (2, 4), (5, 4), (0, 99), (3, 0)]);
        assert_eq!(d.n_complete(), 16);
        assert_eq!(d.count_exact(2), 4);
        assert_eq!(d.count_exact(3), 0);
        assert_eq!(d.count_at_least(2), 8);
        assert_eq!(d.survival(1), 1.0);
        assert_eq!(d.survival(2), 0.5);
        assert_eq!(d.survival(6), 0.0);
        assert_eq!(d.max_len(), 5);
        assert_eq!(RunDistribution::default().survival(1), 0.0);
    }

    #[test]
    fn merge_adds_histograms() {
        // "0100101" holds complete 0-runs of lengths 2 and 1; "0110010"
        // holds a complete 2 and a censored 1.
        let mut a = error_free_runs(&bits("0100101"));
        assert_eq!(pairs(a.complete_counts()), [(1, 1), (2, 1)]);
        let b = error_free_runs(&bits("0110010"));
        assert_eq!(pairs(b.complete_counts()), [(2, 1)]);
        assert_eq!(pairs(b.censored_counts()), [(1, 1)]);
        a.merge(&b);
        assert_eq!(pairs(a.complete_counts()), [(1, 1), (2, 2)]);
        assert_eq!(pairs(a.censored_counts()), [(1, 1)]);
        assert_eq!(a.n_complete(), 3);
    }

    #[test]
    fn censored_runs_can_be_folded_in() {
        let efr = error_free_runs(&bits("00100001000010000010"));
        let folded = efr.with_censored_included();
        assert_eq!(pairs(folded.complete_counts()), [(1, 1), (4, 2), (5, 1)]);
        assert!(folded.censored_counts().is_empty());
        let er = error_runs(&bits("0101"));
        assert_eq!(pairs(er.censored_counts()), [(1, 1)]);
        assert_eq!(pairs(er.with_censored_included().complete_counts()), [(1, 2)]);
    }

    #[test]
    fn segment_boundaries_break_runs() {
        let segs = [bits("01"), bits("10")];
        // Concatenated, the 1-block "11" in the middle would be complete;
        // segmented, the first segment censors a length-1 burst and the
        // second drops its leading block.
        let segmented = runs_segmented(&segs, RunKind::Error);
        assert!(segmented.complete_counts().is_empty());
        assert_eq!(pairs(segmented.censored_counts()), [(1, 1)]);

        let joined = error_runs(&bits("0110"));
        assert_eq!(pairs(joined.complete_counts()), [(2, 1)]);

        // Pooling equals merging the per-segment distributions.
        let mut manual = error_runs(&segs[0]);
        manual.merge(&error_runs(&segs[1]));
        assert_eq!(segmented, manual);
    }

    #[test]
    fn fuzzed_run_invariants() {
        let mut rng = rng_stream(321, 91);
        for _ in 0..200 {
            let len = 1 + rng.next_index(100);
            let raw: Vec<u8> = (0..len).map(|_| (rng.next_f64() < 0.3) as u8).collect();
            let seq = BinaryErrorSequence::from_bits(raw.clone()).unwrap();
            for kind in RunKind::ALL {
                let d = runs_segmented(core::slice::from_ref(&seq), kind);
                // Witnessed starts: transitions from the opposite symbol
                // into the target.
                let t = kind.target();
                let starts = raw
                    .windows(2)
                    .filter(|w| w[0] != t && w[1] == t)
                    .count() as u64;
                assert_eq!(d.n_complete() + d.n_censored(), starts);
                // Survival is nonincreasing from 1.
                let mut prev = d.survival(1);
                for m in 2..=d.max_len() + 1 {
                    let s = d.survival(m);
                    assert!(s <= prev);
                    prev = s;
                }
                assert_eq!(d.count_at_least(1), d.n_complete());
            }
        }
    }

    fn fritchman(rows: &[&[f64]], good: usize) -> MarkovModel {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        let a = validate_transition_matrix(&rows, 1e-9).unwrap();
        MarkovModel::fritchman(a, good).unwrap()
    }

    #[test]
    fn efr_closed_form_hand_values() {
        let m = fritchman(
            &[&[0.9, 0.0, 0.1], &[0.0, 0.4, 0.6], &[0.6, 0.4, 0.0]],
            2,
        );
        assert_eq!(fritchman_efr_closed_form(&m, 0).unwrap(), 1.0);
        assert!((fritchman_efr_closed_form(&m, 1).unwrap() - 1.0).abs() < 1e-15);
        // 0.6 * 0.9 + 0.4 * 0.4
        assert!((fritchman_efr_closed_form(&m, 2).unwrap() - 0.70).abs() < 1e-15);
        // 0.6 * 0.81 + 0.4 * 0.16
        assert!((fritchman_efr_closed_form(&m, 3).unwrap() - 0.55).abs() < 1e-15);
    }

    #[test]
    fn efr_closed_form_with_instant_leave() {
        // A good state with no self-loop contributes only at m = 1.
        let m = fritchman(
            &[&[0.0, 0.0, 1.0], &[0.0, 0.5, 0.5], &[0.6, 0.4, 0.0]],
            2,
        );
        assert!((fritchman_efr_closed_form(&m, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((fritchman_efr_closed_form(&m, 2).unwrap() - 0.2).abs() < 1e-15);
        assert!((fritchman_efr_closed_form(&m, 3).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn efr_closed_form_matches_simulation() {
        let m = fritchman(
            &[&[0.9, 0.0, 0.1], &[0.0, 0.4, 0.6], &[0.6, 0.4, 0.0]],
            2,
        );
        let out = simulate_markov(&m, 1_000_000, InitialState::Stationary, 4242).unwrap();
        let d = error_free_runs(out.as_binary().unwrap());
        assert!(d.n_complete() > 100_000);
        for m_len in 2..=3u64 {
            let closed = fritchman_efr_closed_form(&m, m_len).unwrap();
            let emp = d.survival(m_len);
            assert!((emp - closed).abs() < 0.01, "m={m_len}: {emp} vs {closed}");
        }
    }

    #[test]
    fn er_closed_form_matches_simulation() {
        let m = fritchman(&[&[0.9, 0.1], &[0.7, 0.3]], 1);
        assert_eq!(fritchman_er_closed_form(&m, 1).unwrap(), 1.0);
        assert!((fritchman_er_closed_form(&m, 3).unwrap() - 0.09).abs() < 1e-15);

        let out = simulate_markov(&m, 300_000, InitialState::Stationary, 515).unwrap();
        let d = error_runs(out.as_binary().unwrap());
        assert!(d.n_complete() > 10_000);
        assert!((d.survival(2) - 0.3).abs() < 0.02);
        assert!((d.survival(3) - 0.09).abs() < 0.02);
    }

    #[test]
    fn closed_forms_require_single_error_state() {
        let rows: Vec<Vec<f64>> = alloc::vec![alloc::vec![0.25; 4]; 4];
        let a = validate_transition_matrix(&rows, 1e-9).unwrap();
        let ids = MarkovModel::ids(a.clone()).unwrap();
        assert_eq!(fritchman_efr_closed_form(&ids, 2), Err(ModelError::NotFritchman));

        let two_bad = MarkovModel::fritchman(a, 2).unwrap();
        assert_eq!(
            fritchman_er_closed_form(&two_bad, 2),
            Err(ModelError::MultipleErrorStates { bad_count: 2 })
        );
    }
}
