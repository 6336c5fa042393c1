//! Transition-matrix validation and the labelled Markov model type.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{InputError, ValidationError};
use crate::seq::SyncState;

/// Row-stochastic matrix in canonical form: every row either sums to exactly
/// one (renormalized on construction) or is all zero and flagged unobserved.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    data: Vec<f64>,
    unobserved: Vec<bool>,
}

/// Validates and canonicalizes a transition matrix.
///
/// * non-square or empty input is rejected;
/// * negative entries are rejected regardless of row sums;
/// * an all-zero row is legal and flagged unobserved;
/// * any other row must sum to within `tol` of one and is divided by its
///   exact sum.
pub fn validate_transition_matrix(
    rows: &[Vec<f64>],
    tol: f64,
) -> Result<TransitionMatrix, ValidationError> {
    let n = rows.len();
    if n == 0 {
        return Err(ValidationError::Empty);
    }
    for row in rows {
        if row.len() != n {
            return Err(ValidationError::NotSquare { rows: n, cols: row.len() });
        }
    }
    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v < 0.0 || !v.is_finite() {
                return Err(ValidationError::NegativeEntry { row: r, col: c });
            }
        }
    }
    let mut data = Vec::with_capacity(n * n);
    let mut unobserved = vec![false; n];
    for (r, row) in rows.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if sum == 0.0 {
            unobserved[r] = true;
            data.extend(core::iter::repeat_n(0.0, n));
        } else if (sum - 1.0).abs() <= tol {
            data.extend(row.iter().map(|&v| v / sum));
        } else {
            return Err(ValidationError::RowSumOutOfTolerance { row: r, sum });
        }
    }
    Ok(TransitionMatrix { n, data, unobserved })
}

impl TransitionMatrix {
    /// Builds from rows already known to be canonical (internal fits).
    pub(crate) fn from_canonical(n: usize, data: Vec<f64>, unobserved: Vec<bool>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        debug_assert_eq!(unobserved.len(), n);
        Self { n, data, unobserved }
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn is_unobserved(&self, i: usize) -> bool {
        self.unobserved[i]
    }

    pub fn unobserved_rows(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.unobserved[i]).collect()
    }

    /// Stationary distribution by damped power iteration. Mass flowing into
    /// an unobserved (all-zero) row vanishes and is renormalized away, so the
    /// result describes the recurrent part of the chain.
    pub fn stationary(&self) -> Vec<f64> {
        let n = self.n;
        let observed: Vec<usize> = (0..n).filter(|&i| !self.unobserved[i]).collect();
        if observed.is_empty() {
            return vec![1.0 / n as f64; n];
        }
        let mut pi = vec![0.0; n];
        for &i in &observed {
            pi[i] = 1.0 / observed.len() as f64;
        }
        let mut next = vec![0.0; n];
        for _ in 0..500_000 {
            for x in next.iter_mut() {
                *x = 0.0;
            }
            for (i, &w) in pi.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let row = self.row(i);
                for (nx, &r) in next.iter_mut().zip(row) {
                    *nx += w * r;
                }
            }
            // Lazy step keeps periodic chains from oscillating.
            let total: f64 = next.iter().sum();
            if total == 0.0 {
                return pi;
            }
            let mut delta = 0.0f64;
            for j in 0..n {
                let v = 0.5 * pi[j] + 0.5 * next[j] / total;
                delta = delta.max((v - pi[j]).abs());
                pi[j] = v;
            }
            if delta < 1e-14 {
                break;
            }
        }
        pi
    }
}

/// Per-state tag: either a channel event symbol or a good/bad partition tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateLabel {
    Sync(SyncState),
    Good,
    Bad,
}

impl StateLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            StateLabel::Sync(s) => match s {
                SyncState::Transmission => "t",
                SyncState::Substitution => "s",
                SyncState::Deletion => "d",
                SyncState::Insertion => "i",
            },
            StateLabel::Good => "good",
            StateLabel::Bad => "bad",
        }
    }
}

/// Labelled Markov chain with a (possibly deterministic) emission matrix.
///
/// Two families are constructible:
/// * [`MarkovModel::ids`]: four states labelled t, s, d, i in canonical
///   order, each emitting its own symbol;
/// * [`MarkovModel::fritchman`]: `good_count` good states followed by bad
///   states; good states emit 0, bad states emit 1.
///
/// The emission matrix is stored symbol-major: `emission[symbol][state]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    transition: TransitionMatrix,
    emission: Vec<f64>,
    n_emission_symbols: usize,
    labels: Vec<StateLabel>,
    good_count: Option<usize>,
}

impl MarkovModel {
    /// Four-state model over the channel events t, s, d, i.
    pub fn ids(transition: TransitionMatrix) -> Result<Self, ValidationError> {
        let n = transition.n_states();
        if n != SyncState::COUNT {
            return Err(ValidationError::WrongDimension { expected: SyncState::COUNT, actual: n });
        }
        let mut emission = vec![0.0; n * n];
        for s in 0..n {
            emission[s * n + s] = 1.0;
        }
        let labels = SyncState::ALL.iter().map(|&s| StateLabel::Sync(s)).collect();
        Ok(Self { transition, emission, n_emission_symbols: n, labels, good_count: None })
    }

    /// Partitioned good/bad model: states `0..good_count` emit 0, the rest
    /// emit 1. Requires `1 <= good_count < n`.
    pub fn fritchman(
        transition: TransitionMatrix,
        good_count: usize,
    ) -> Result<Self, ValidationError> {
        let n = transition.n_states();
        if good_count == 0 || good_count >= n {
            return Err(ValidationError::BadPartition { n_states: n, good_count });
        }
        let mut emission = vec![0.0; 2 * n];
        let mut labels = Vec::with_capacity(n);
        for state in 0..n {
            if state < good_count {
                emission[state] = 1.0; // symbol 0 row
                labels.push(StateLabel::Good);
            } else {
                emission[n + state] = 1.0; // symbol 1 row
                labels.push(StateLabel::Bad);
            }
        }
        Ok(Self { transition, emission, n_emission_symbols: 2, labels, good_count: Some(good_count) })
    }

    pub fn n_states(&self) -> usize {
        self.transition.n_states()
    }

    pub fn transition(&self) -> &TransitionMatrix {
        &self.transition
    }

    pub fn n_emission_symbols(&self) -> usize {
        self.n_emission_symbols
    }

    /// `P(symbol | state)`.
    pub fn emission_prob(&self, symbol: usize, state: usize) -> f64 {
        self.emission[symbol * self.n_states() + state]
    }

    pub fn labels(&self) -> &[StateLabel] {
        &self.labels
    }

    pub fn good_count(&self) -> Option<usize> {
        self.good_count
    }

    pub fn is_fritchman(&self) -> bool {
        self.good_count.is_some()
    }

    pub fn is_ids(&self) -> bool {
        self.good_count.is_none()
    }

    /// Replaces the transition matrix, keeping labels and emissions.
    pub(crate) fn with_transition(&self, transition: TransitionMatrix) -> Self {
        debug_assert_eq!(transition.n_states(), self.n_states());
        Self { transition, ..self.clone() }
    }

    /// Replaces the emission matrix (fits with `estimate_emission`).
    pub(crate) fn with_emission(&self, emission: Vec<f64>) -> Self {
        debug_assert_eq!(emission.len(), self.emission.len());
        Self { emission, ..self.clone() }
    }
}

/// Memoryless insertion/deletion/substitution channel parameters.
///
/// `p_i`, `p_d` and the implied `p_t = 1 - p_i - p_d` are per-event
/// probabilities; `p_s` is the substitution probability conditional on a
/// transmission. `max_insertions` caps insertions per queued symbol; once
/// reached, the insertion probability is redistributed proportionally
/// between transmit and delete.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmParams {
    pub p_i: f64,
    pub p_d: f64,
    pub p_s: f64,
    pub max_insertions: u32,
}

impl DmParams {
    pub fn p_t(&self) -> f64 {
        1.0 - self.p_i - self.p_d
    }

    pub fn validate(&self) -> Result<(), InputError> {
        for (name, v) in [("p_i", self.p_i), ("p_d", self.p_d), ("p_s", self.p_s)] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(InputError::BadProbability { name, value: v });
            }
        }
        if self.p_i + self.p_d > 1.0 {
            return Err(InputError::BadProbability { name: "p_i + p_d", value: self.p_i + self.p_d });
        }
        Ok(())
    }
}

/// IID substitution-only channel: each position errs with probability `p_e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IidParams {
    pub p_e: f64,
}

impl IidParams {
    pub fn validate(&self) -> Result<(), InputError> {
        if !(0.0..=1.0).contains(&self.p_e) || !self.p_e.is_finite() {
            return Err(InputError::BadProbability { name: "p_e", value: self.p_e });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(m: &[&[f64]]) -> Vec<Vec<f64>> {
        m.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn exact_rows_pass_unchanged() {
        let m = validate_transition_matrix(&rows(&[&[0.5, 0.5], &[0.25, 0.75]]), 1e-6).unwrap();
        assert_eq!(m.row(0), &[0.5, 0.5]);
        assert_eq!(m.row(1), &[0.25, 0.75]);
        assert!(m.unobserved_rows().is_empty());
    }

    #[test]
    fn out_of_tolerance_row_rejected() {
        let err = validate_transition_matrix(&rows(&[&[0.6, 0.39], &[0.5, 0.5]]), 1e-3)
            .unwrap_err();
        assert!(matches!(err, ValidationError::RowSumOutOfTolerance { row: 0, .. }));
    }

    #[test]
    fn near_one_row_is_renormalized() {
        // Sum 0.99996244, inside the 1e-3 ingest tolerance.
        let m = validate_transition_matrix(
            &rows(&[
                &[0.9986, 0.0011, 1.5346e-4, 1.0898e-4],
                &[0.0203, 0.9797, 0.0, 0.0],
                &[0.0122, 0.8293, 0.1585, 0.0],
                &[0.0571, 0.6429, 0.0, 0.3],
            ]),
            1e-3,
        )
        .unwrap();
        let s: f64 = m.row(0).iter().sum();
        assert!((s - 1.0).abs() < 1e-15, "row 0 sums to {s}");
        assert!(m.row(0)[0] > 0.9986);
    }

    #[test]
    fn all_zero_row_flagged_unobserved() {
        let m = validate_transition_matrix(&rows(&[&[0.0, 0.0], &[1.0, 0.0]]), 1e-6).unwrap();
        assert!(m.is_unobserved(0));
        assert!(!m.is_unobserved(1));
        assert_eq!(m.unobserved_rows(), alloc::vec![0]);
    }

    #[test]
    fn negative_entry_rejected_even_if_sum_is_one() {
        let err = validate_transition_matrix(&rows(&[&[1.1, -0.1], &[0.5, 0.5]]), 1.0)
            .unwrap_err();
        assert_eq!(err, ValidationError::NegativeEntry { row: 0, col: 1 });
    }

    #[test]
    fn non_square_rejected() {
        let err = validate_transition_matrix(&rows(&[&[1.0, 0.0]]), 1e-6).unwrap_err();
        assert_eq!(err, ValidationError::NotSquare { rows: 1, cols: 2 });
    }

    use crate::testutil::low_snr_rows;

    #[test]
    fn four_state_low_snr_matrix_canonicalizes() {
        let m = validate_transition_matrix(&low_snr_rows(), 1e-3).unwrap();
        assert_eq!(m.unobserved_rows(), alloc::vec![3]);
        assert_eq!(m.get(2, 0), 1.0);
        let s: f64 = m.row(0).iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stationary_matches_hand_solution() {
        // pi = pi A solved by hand: pi = (2/3, 1/3) for this chain.
        let m = validate_transition_matrix(&rows(&[&[0.9, 0.1], &[0.2, 0.8]]), 1e-9).unwrap();
        let pi = m.stationary();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-10);
        assert!((pi[1] - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn stationary_low_snr_balance() {
        // Balance equations by hand: pi_s = pi_t * a_ts / (1 - a_ss),
        // pi_d = pi_t * a_td, pi_i = 0.
        let m = validate_transition_matrix(&low_snr_rows(), 1e-3).unwrap();
        let pi = m.stationary();
        let expect_s = pi[0] * m.get(0, 1) / (1.0 - m.get(1, 1));
        let expect_d = pi[0] * m.get(0, 2);
        assert!((pi[1] - expect_s).abs() < 1e-12);
        assert!((pi[2] - expect_d).abs() < 1e-12);
        assert!(pi[3] == 0.0);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fritchman_emission_matches_partition() {
        let a = validate_transition_matrix(
            &rows(&[&[0.9, 0.0, 0.1], &[0.0, 0.5, 0.5], &[0.5, 0.5, 0.0]]),
            1e-9,
        )
        .unwrap();
        let m = MarkovModel::fritchman(a, 2).unwrap();
        // Symbol 0 row (1, 1, 0); symbol 1 row (0, 0, 1).
        assert_eq!(
            (0..3).map(|s| m.emission_prob(0, s)).collect::<Vec<_>>(),
            alloc::vec![1.0, 1.0, 0.0]
        );
        assert_eq!(
            (0..3).map(|s| m.emission_prob(1, s)).collect::<Vec<_>>(),
            alloc::vec![0.0, 0.0, 1.0]
        );
        assert_eq!(m.good_count(), Some(2));
        assert_eq!(m.labels()[2], StateLabel::Bad);
    }

    #[test]
    fn fritchman_partition_bounds_checked() {
        let a = validate_transition_matrix(&rows(&[&[0.5, 0.5], &[0.5, 0.5]]), 1e-9).unwrap();
        assert!(MarkovModel::fritchman(a.clone(), 0).is_err());
        assert!(MarkovModel::fritchman(a.clone(), 2).is_err());
        assert!(MarkovModel::fritchman(a, 1).is_ok());
    }

    #[test]
    fn ids_model_needs_four_states() {
        let a = validate_transition_matrix(&rows(&[&[0.5, 0.5], &[0.5, 0.5]]), 1e-9).unwrap();
        assert!(matches!(
            MarkovModel::ids(a),
            Err(ValidationError::WrongDimension { expected: 4, actual: 2 })
        ));
    }

    #[test]
    fn dm_params_validation() {
        assert!(DmParams { p_i: 0.05, p_d: 0.05, p_s: 0.1, max_insertions: 2 }.validate().is_ok());
        assert!(DmParams { p_i: 0.6, p_d: 0.6, p_s: 0.0, max_insertions: 1 }.validate().is_err());
        assert!(DmParams { p_i: -0.1, p_d: 0.0, p_s: 0.0, max_insertions: 1 }.validate().is_err());
        assert!(IidParams { p_e: 1.5 }.validate().is_err());
    }
}
