//! Parameter estimation from event paths and emission sequences.
//!
//! Fully observed paths are fitted by counting ([`estimate_probs`],
//! [`count_mle`]); emission sequences of a hidden chain are fitted by scaled
//! forward/backward re-estimation ([`baum_welch`]).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{FitError, InputError};
use crate::model::{MarkovModel, TransitionMatrix};
use crate::seq::{SyncErrorSequence, SyncState};

/// Event fractions of an event path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelProbEstimate {
    pub p_t: f64,
    pub p_s: f64,
    pub p_d: f64,
    pub p_i: f64,
    /// Event counts in canonical order t, s, d, i.
    pub counts: [u64; 4],
    pub total: u64,
}

/// Fraction of each event kind in the path.
pub fn estimate_probs(seq: &SyncErrorSequence) -> Result<ChannelProbEstimate, InputError> {
    if seq.is_empty() {
        return Err(InputError::EmptySequence);
    }
    let counts = seq.state_counts();
    let total = seq.len() as u64;
    let frac = |s: SyncState| counts[s.index()] as f64 / total as f64;
    Ok(ChannelProbEstimate {
        p_t: frac(SyncState::Transmission),
        p_s: frac(SyncState::Substitution),
        p_d: frac(SyncState::Deletion),
        p_i: frac(SyncState::Insertion),
        counts,
        total,
    })
}

/// Normalizes a row-major weight matrix into a transition matrix; all-zero
/// rows are flagged unobserved. Counting fits and forward/backward fits both
/// construct their result here, so a chain whose states are directly visible
/// produces bit-identical output on either route.
fn matrix_from_weights(n: usize, weights: &[f64]) -> TransitionMatrix {
    let mut data = vec![0.0; n * n];
    let mut unobserved = vec![false; n];
    for i in 0..n {
        let row = &weights[i * n..(i + 1) * n];
        let total: f64 = row.iter().sum();
        if total == 0.0 {
            unobserved[i] = true;
        } else {
            for (j, &w) in row.iter().enumerate() {
                data[i * n + j] = w / total;
            }
        }
    }
    TransitionMatrix::from_canonical(n, data, unobserved)
}

/// Maximum-likelihood transition matrix of a fully observed event path:
/// `a[i][j] = count(i -> j) / count(i -> any)`. States with no outgoing
/// transitions get an all-zero row flagged unobserved.
pub fn count_mle(seq: &SyncErrorSequence) -> Result<TransitionMatrix, InputError> {
    count_mle_segments(core::slice::from_ref(seq))
}

/// [`count_mle`] over independent segments: transitions are counted within
/// each segment only, never across a boundary.
pub fn count_mle_segments(
    segments: &[SyncErrorSequence],
) -> Result<TransitionMatrix, InputError> {
    let n = SyncState::COUNT;
    let mut weights = vec![0.0f64; n * n];
    let mut seen = false;
    for seg in segments {
        if !seg.is_empty() {
            seen = true;
        }
        for w in seg.states().windows(2) {
            weights[w[0].index() * n + w[1].index()] += 1.0;
        }
    }
    if !seen {
        return Err(InputError::EmptySequence);
    }
    Ok(matrix_from_weights(n, &weights))
}

/// Knobs for [`baum_welch`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Re-estimation budget (number of parameter updates).
    pub max_iters: usize,
    /// Converged when the log-likelihood moves less than this between
    /// consecutive iterations.
    pub tol: f64,
    /// Also re-estimate the emission matrix. Off by default: the partitioned
    /// good/bad and event-labelled models have structural emissions.
    pub fit_emission: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iters: 200, tol: 1e-7, fit_emission: false }
    }
}

/// Outcome of a forward/backward fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: MarkovModel,
    /// Log-likelihood of the data under the returned model.
    pub log_likelihood: f64,
    /// Parameter updates performed.
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after each evaluation; non-decreasing up to rounding.
    pub trace: Vec<f64>,
}

struct EStepStats {
    ll: f64,
    /// Expected transition counts, row-major n*n.
    xi: Vec<f64>,
    /// Expected occupancy per emitted symbol, symbol-major m*n.
    emit: Vec<f64>,
    /// Total expected occupancy per state.
    occupancy: Vec<f64>,
    /// Expected first-step occupancy per state.
    first: Vec<f64>,
}

/// One scaled forward/backward sweep over all sequences.
///
/// Scaling per Rabiner: forward variables are normalized at every step and
/// backward variables divided by the same normalizers, so posteriors come
/// out directly and the log-likelihood is the summed log of the normalizers.
fn e_step<S: AsRef<[usize]>>(
    model: &MarkovModel,
    pi: &[f64],
    seqs: &[S],
) -> Result<EStepStats, FitError> {
    let n = model.n_states();
    let m = model.n_emission_symbols();
    // b[sym * n + state] = P(sym | state), hoisted out of the inner loops.
    let mut b = vec![0.0f64; m * n];
    for sym in 0..m {
        for state in 0..n {
            b[sym * n + state] = model.emission_prob(sym, state);
        }
    }
    let a = model.transition();

    let mut stats = EStepStats {
        ll: 0.0,
        xi: vec![0.0; n * n],
        emit: vec![0.0; m * n],
        occupancy: vec![0.0; n],
        first: vec![0.0; n],
    };
    let mut alpha: Vec<f64> = Vec::new();
    let mut scale: Vec<f64> = Vec::new();

    for seq in seqs {
        let obs = seq.as_ref();
        let t_len = obs.len();
        alpha.clear();
        alpha.resize(t_len * n, 0.0);
        scale.clear();
        scale.resize(t_len, 0.0);

        let brow = |sym: usize| &b[sym * n..(sym + 1) * n];

        let mut c = 0.0;
        for i in 0..n {
            let v = pi[i] * brow(obs[0])[i];
            alpha[i] = v;
            c += v;
        }
        if c == 0.0 {
            return Err(FitError::ZeroLikelihood);
        }
        for v in alpha[..n].iter_mut() {
            *v /= c;
        }
        scale[0] = c;
        for t in 1..t_len {
            let (prev, cur) = alpha.split_at_mut(t * n);
            let prev = &prev[(t - 1) * n..];
            let cur = &mut cur[..n];
            let bo = brow(obs[t]);
            let mut c = 0.0;
            for j in 0..n {
                let mut acc = 0.0;
                for (i, &ap) in prev.iter().enumerate() {
                    acc += ap * a.get(i, j);
                }
                let v = acc * bo[j];
                cur[j] = v;
                c += v;
            }
            if c == 0.0 {
                return Err(FitError::ZeroLikelihood);
            }
            for v in cur.iter_mut() {
                *v /= c;
            }
            scale[t] = c;
        }
        stats.ll += scale.iter().map(|&c| libm::log(c)).sum::<f64>();

        // Backward sweep accumulating posteriors on the fly.
        let mut beta_next = vec![1.0f64; n];
        let mut beta_t = vec![0.0f64; n];
        let last = &alpha[(t_len - 1) * n..];
        for i in 0..n {
            let g = last[i] * beta_next[i];
            stats.occupancy[i] += g;
            stats.emit[obs[t_len - 1] * n + i] += g;
        }
        for t in (0..t_len - 1).rev() {
            let bo = brow(obs[t + 1]);
            let ct1 = scale[t + 1];
            let at = &alpha[t * n..(t + 1) * n];
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    let step = a.get(i, j) * bo[j] * beta_next[j] / ct1;
                    acc += step;
                    stats.xi[i * n + j] += at[i] * step;
                }
                beta_t[i] = acc;
            }
            for i in 0..n {
                let g = at[i] * beta_t[i];
                stats.occupancy[i] += g;
                stats.emit[obs[t] * n + i] += g;
                if t == 0 {
                    stats.first[i] += g;
                }
            }
            core::mem::swap(&mut beta_next, &mut beta_t);
        }
    }
    Ok(stats)
}

/// Fits the transition matrix (and optionally emissions) of `model` to one
/// emission sequence by expectation-maximization. `obs` holds emission
/// symbol indices. The initial state distribution is taken uniform and
/// re-estimated internally; it is not part of the returned model.
pub fn baum_welch(
    model: &MarkovModel,
    obs: &[usize],
    opts: &FitOptions,
) -> Result<FitReport, FitError> {
    baum_welch_multi(model, core::slice::from_ref(&obs), opts)
}

/// [`baum_welch`] over several independent sequences, pooling their
/// sufficient statistics into one update per iteration.
pub fn baum_welch_multi<S: AsRef<[usize]>>(
    model: &MarkovModel,
    seqs: &[S],
    opts: &FitOptions,
) -> Result<FitReport, FitError> {
    if opts.max_iters == 0 {
        return Err(FitError::BadOptions("max_iters must be positive"));
    }
    if !opts.tol.is_finite() || opts.tol <= 0.0 {
        return Err(FitError::BadOptions("tol must be positive and finite"));
    }
    if seqs.is_empty() {
        return Err(FitError::EmptyObservation);
    }
    let n = model.n_states();
    let m = model.n_emission_symbols();
    for seq in seqs {
        let obs = seq.as_ref();
        if obs.is_empty() {
            return Err(FitError::EmptyObservation);
        }
        if obs.len() < 2 {
            return Err(FitError::TooShort { len: obs.len() });
        }
        for &sym in obs {
            if sym >= m {
                return Err(FitError::SymbolOutOfRange { symbol: sym, n_symbols: m });
            }
        }
    }

    let mut cur = model.clone();
    let mut pi = vec![1.0 / n as f64; n];
    let mut trace: Vec<f64> = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;
    loop {
        let stats = e_step(&cur, &pi, seqs)?;
        trace.push(stats.ll);
        if trace.len() >= 2 {
            let prev = trace[trace.len() - 2];
            if (stats.ll - prev).abs() < opts.tol {
                converged = true;
                break;
            }
        }
        if iterations >= opts.max_iters {
            break;
        }
        cur = cur.with_transition(matrix_from_weights(n, &stats.xi));
        if opts.fit_emission {
            let mut emission = vec![0.0f64; m * n];
            for state in 0..n {
                let total = stats.occupancy[state];
                if total == 0.0 {
                    // Never occupied: keep the previous column.
                    for sym in 0..m {
                        emission[sym * n + state] = cur.emission_prob(sym, state);
                    }
                } else {
                    for sym in 0..m {
                        emission[sym * n + state] = stats.emit[sym * n + state] / total;
                    }
                }
            }
            cur = cur.with_emission(emission);
        }
        let first_total: f64 = stats.first.iter().sum();
        if first_total > 0.0 {
            for (p, &f) in pi.iter_mut().zip(&stats.first) {
                *p = f / first_total;
            }
        }
        iterations += 1;
    }
    let log_likelihood = *trace.last().expect("at least one evaluation");
    Ok(FitReport { model: cur, log_likelihood, iterations, converged, trace })
}
