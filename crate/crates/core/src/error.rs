//! Error types shared across the crate.

use core::fmt;

/// Rejected transition or emission matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationError {
    /// Matrix has no rows.
    Empty,
    /// Row length does not match the number of rows.
    NotSquare { rows: usize, cols: usize },
    /// Negative entries are rejected regardless of the row sum.
    NegativeEntry { row: usize, col: usize },
    /// Nonzero row whose sum is farther than `tol` from one.
    RowSumOutOfTolerance { row: usize, sum: f64 },
    /// Model constructor got a matrix of the wrong dimension.
    WrongDimension { expected: usize, actual: usize },
    /// Partition size for a good/bad model must satisfy 1 <= k < n.
    BadPartition { n_states: usize, good_count: usize },
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => write!(f, "transition matrix has no rows"),
            Self::NotSquare { rows, cols } => {
                write!(f, "matrix is not square: {rows} rows but a row of length {cols}")
            }
            Self::NegativeEntry { row, col } => {
                write!(f, "negative entry at row {row}, column {col}")
            }
            Self::RowSumOutOfTolerance { row, sum } => {
                write!(f, "row {row} sums to {sum}, outside tolerance of 1")
            }
            Self::WrongDimension { expected, actual } => {
                write!(f, "expected a {expected}-state matrix, got {actual} states")
            }
            Self::BadPartition { n_states, good_count } => {
                write!(f, "good-state count {good_count} invalid for {n_states} states")
            }
        }
    }
}

impl core::error::Error for ValidationError {}

/// Rejected argument to a sequence-level operation.
#[derive(Debug, Clone, PartialEq)]
pub enum InputError {
    /// The two sequences were built over different alphabets.
    AlphabetMismatch,
    /// Alphabets need at least two distinct symbols.
    AlphabetTooSmall { size: usize },
    /// Alphabet constructed with a repeated symbol.
    DuplicateSymbol { symbol: char },
    /// Symbol index out of range for the alphabet.
    SymbolOutOfRange { index: u32, alphabet_size: usize },
    /// Character not present in the alphabet.
    UnknownSymbol { symbol: char },
    /// Operation requires a non-empty sequence.
    EmptySequence,
    /// A sync-error path does not consume exactly the transmitted length.
    PathLengthMismatch { consumed: usize, tx_len: usize },
    /// Probability parameter outside its legal range.
    BadProbability { name: &'static str, value: f64 },
    /// Unrecognised character in a sync-error sequence text form.
    BadSyncChar { ch: char },
    /// Unrecognised character in a binary error sequence text form.
    BadBinaryChar { ch: char },
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::AlphabetMismatch => write!(f, "sequences use different alphabets"),
            Self::AlphabetTooSmall { size } => {
                write!(f, "alphabet needs at least 2 symbols, got {size}")
            }
            Self::DuplicateSymbol { symbol } => {
                write!(f, "alphabet symbol {symbol:?} repeated")
            }
            Self::SymbolOutOfRange { index, alphabet_size } => {
                write!(f, "symbol index {index} out of range for alphabet of {alphabet_size}")
            }
            Self::UnknownSymbol { symbol } => {
                write!(f, "symbol {symbol:?} not in the alphabet")
            }
            Self::EmptySequence => write!(f, "sequence must be non-empty"),
            Self::PathLengthMismatch { consumed, tx_len } => {
                write!(f, "path consumes {consumed} transmitted symbols, sequence has {tx_len}")
            }
            Self::BadProbability { name, value } => {
                write!(f, "probability {name} = {value} outside its legal range")
            }
            Self::BadSyncChar { ch } => {
                write!(f, "invalid sync-state character {ch:?} (expected t, s, d or i)")
            }
            Self::BadBinaryChar { ch } => {
                write!(f, "invalid binary character {ch:?} (expected 0 or 1)")
            }
        }
    }
}

impl core::error::Error for InputError {}

/// Simulation refused to run or to continue.
#[derive(Debug, Clone, PartialEq)]
pub enum SimulationError {
    /// Chain entered a state whose transition row is all zero.
    UnobservedState { state: usize },
    /// Initial state index out of range.
    BadInitialState { state: usize, n_states: usize },
}

impl fmt::Display for SimulationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnobservedState { state } => {
                write!(f, "chain entered unobserved state {state} (all-zero transition row)")
            }
            Self::BadInitialState { state, n_states } => {
                write!(f, "initial state {state} out of range for {n_states} states")
            }
        }
    }
}

impl core::error::Error for SimulationError {}

/// Model fitting failed.
#[derive(Debug, Clone, PartialEq)]
pub enum FitError {
    /// Transition counting needs at least two states in the sequence.
    TooShort { len: usize },
    /// No observation sequences supplied, or one of them is empty.
    EmptyObservation,
    /// Observation symbol outside the model's emission range.
    SymbolOutOfRange { symbol: usize, n_symbols: usize },
    /// Total likelihood of the data is zero under the initial model.
    ZeroLikelihood,
    /// Nonsensical fit options (zero iterations, non-finite tolerance, ...).
    BadOptions(&'static str),
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooShort { len } => {
                write!(f, "sequence of length {len} has no transitions to count")
            }
            Self::EmptyObservation => write!(f, "no non-empty observation sequence supplied"),
            Self::SymbolOutOfRange { symbol, n_symbols } => {
                write!(f, "observation symbol {symbol} out of range for {n_symbols} emission symbols")
            }
            Self::ZeroLikelihood => {
                write!(f, "observations impossible under the initial model (zero likelihood)")
            }
            Self::BadOptions(what) => write!(f, "invalid fit options: {what}"),
        }
    }
}

impl core::error::Error for FitError {}

/// Closed-form run distribution requested for an unsupported model.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// Model is not tagged as a partitioned good/bad model.
    NotFritchman,
    /// Closed forms hold only for a single error state.
    MultipleErrorStates { bad_count: usize },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotFritchman => write!(f, "model is not a partitioned good/bad model"),
            Self::MultipleErrorStates { bad_count } => {
                write!(f, "closed form requires exactly one error state, model has {bad_count}")
            }
        }
    }
}

impl core::error::Error for ModelError {}

/// Goodness-of-fit computation failed.
#[derive(Debug, Clone, PartialEq)]
pub enum GofError {
    /// Expected distribution has no runs.
    EmptyExpected,
    /// Observed distribution has no runs.
    EmptyObserved,
    /// Bin width must be at least 1.
    BadWidth { width: u64 },
    /// Significance level must lie strictly between 0 and 1.
    BadSignificance { value: f64 },
    /// An expected bin count of zero would divide the statistic by zero.
    ZeroExpectedBin { bin: usize },
}

impl fmt::Display for GofError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyExpected => write!(f, "expected run distribution is empty"),
            Self::EmptyObserved => write!(f, "observed run distribution is empty"),
            Self::BadWidth { width } => write!(f, "bin width must be >= 1, got {width}"),
            Self::BadSignificance { value } => {
                write!(f, "significance must be in (0, 1), got {value}")
            }
            Self::ZeroExpectedBin { bin } => {
                write!(f, "expected count in bin {bin} is zero")
            }
        }
    }
}

impl core::error::Error for GofError {}
