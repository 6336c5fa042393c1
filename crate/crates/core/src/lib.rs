//! Modelling toolkit for symbol-level channels with synchronisation errors.
//!
//! A transmission over such a channel is described by a sequence of
//! per-symbol events: error-free transmission (`t`), substitution (`s`),
//! deletion (`d`) and insertion (`i`). This crate provides
//!
//! * recovery of that event sequence from a transmitted/received pair by
//!   minimum-edit alignment ([`align`]),
//! * binarisation of the event sequence into error indicator sequences for
//!   several error categories ([`categories`]),
//! * channel simulators: a memoryless insertion/deletion/substitution
//!   channel, an IID substitution channel, and labelled Markov chains
//!   including partitioned good/bad burst-error models ([`channels`]),
//! * parameter estimation: state-fraction estimates, visible-chain
//!   transition counting, and Baum-Welch re-estimation ([`estimate`]),
//! * error-free / error run-length statistics and closed-form run
//!   distributions for single-error-state partitioned models ([`runstats`]),
//! * chi-square / MSE goodness-of-fit machinery with the >=5 expected-count
//!   binning rule ([`gof`]).
//!
//! The crate is `no_std` (with `alloc`); enable the default `std` feature
//! for `std::error::Error` interop in application code.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod align;
pub mod categories;
pub mod channels;
pub mod error;
pub mod estimate;
pub mod gof;
pub mod model;
pub mod rng;
pub mod runstats;
pub mod seq;
#[cfg(test)]
mod testutil;

pub use align::{align_frames, edit_distance, infer_sync_sequence, AlignmentResult};
pub use categories::{binarize, ErrorCategory};
pub use channels::{
    apply_sync_seq, fritchman_init, simulate_dm, simulate_iid, simulate_markov, DmOutput,
    InitialState, MarkovEmission,
};
pub use error::{FitError, GofError, InputError, ModelError, SimulationError, ValidationError};
pub use estimate::{
    baum_welch, baum_welch_multi, count_mle, count_mle_segments, estimate_probs,
    ChannelProbEstimate, FitOptions, FitReport,
};
pub use gof::{
    bin_runs, chi2_survival, chi_squared, compare, compare_distributions, mse, BinnedRuns,
    GofReport, Verdict,
};
pub use model::{
    validate_transition_matrix, DmParams, IidParams, MarkovModel, StateLabel, TransitionMatrix,
};
pub use rng::{rng_stream, RngStream, Seed};
pub use runstats::{
    error_free_runs, error_runs, fritchman_efr_closed_form, fritchman_er_closed_form,
    runs_segmented, RunDistribution, RunKind,
};
pub use seq::{Alphabet, BinaryErrorSequence, SymbolSequence, SyncErrorSequence, SyncState};
