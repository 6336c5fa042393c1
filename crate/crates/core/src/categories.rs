//! Binarisation of event sequences into per-category error indicators.

use alloc::vec::Vec;

use crate::seq::{BinaryErrorSequence, SyncErrorSequence, SyncState};

/// Which channel events count as an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ErrorCategory {
    /// Any deviation from error-free transmission: s, i or d.
    AnyError,
    /// Synchronisation errors only: i or d.
    SyncError,
    /// Substitutions only.
    Substitution,
    /// Insertions only.
    Insertion,
    /// Deletions only.
    Deletion,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 5] = [
        ErrorCategory::AnyError,
        ErrorCategory::SyncError,
        ErrorCategory::Substitution,
        ErrorCategory::Insertion,
        ErrorCategory::Deletion,
    ];

    /// Name used on the command line and in report files.
    pub fn cli_name(self) -> &'static str {
        match self {
            ErrorCategory::AnyError => "any-error",
            ErrorCategory::SyncError => "sync",
            ErrorCategory::Substitution => "subst",
            ErrorCategory::Insertion => "ins",
            ErrorCategory::Deletion => "del",
        }
    }

    pub fn from_cli_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.cli_name() == name)
    }

    /// Does `state` count as an error under this category?
    pub fn is_error(self, state: SyncState) -> bool {
        match self {
            ErrorCategory::AnyError => state != SyncState::Transmission,
            ErrorCategory::SyncError => {
                state == SyncState::Insertion || state == SyncState::Deletion
            }
            ErrorCategory::Substitution => state == SyncState::Substitution,
            ErrorCategory::Insertion => state == SyncState::Insertion,
            ErrorCategory::Deletion => state == SyncState::Deletion,
        }
    }
}

/// Maps each event to 1 if it is an error under `category`, else 0.
/// Positions are preserved: output length equals input length.
pub fn binarize(seq: &SyncErrorSequence, category: ErrorCategory) -> BinaryErrorSequence {
    let bits: Vec<u8> = seq
        .states()
        .iter()
        .map(|&st| u8::from(category.is_error(st)))
        .collect();
    BinaryErrorSequence::from_bits(bits).expect("bits are 0/1 by construction")
}
