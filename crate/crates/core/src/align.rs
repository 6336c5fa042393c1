//! Minimum-edit alignment of transmitted/received pairs and recovery of the
//! per-symbol event sequence.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::InputError;
use crate::seq::{SymbolSequence, SyncErrorSequence, SyncState};

/// Recovered event path and its edit cost for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    pub path: SyncErrorSequence,
    pub cost: u64,
}

fn check_alphabets(tx: &SymbolSequence, rx: &SymbolSequence) -> Result<(), InputError> {
    if tx.alphabet() != rx.alphabet() {
        return Err(InputError::AlphabetMismatch);
    }
    Ok(())
}

/// Levenshtein distance with unit insertion/deletion/substitution costs.
pub fn edit_distance(tx: &SymbolSequence, rx: &SymbolSequence) -> Result<u64, InputError> {
    check_alphabets(tx, rx)?;
    let a = tx.indices();
    let b = rx.indices();
    let mut prev: Vec<u32> = (0..=b.len() as u32).collect();
    let mut cur = vec![0u32; b.len() + 1];
    for (i, &ai) in a.iter().enumerate() {
        cur[0] = i as u32 + 1;
        for (j, &bj) in b.iter().enumerate() {
            let sub = prev[j] + u32::from(ai != bj);
            let del = prev[j + 1] + 1;
            let ins = cur[j] + 1;
            cur[j + 1] = sub.min(del).min(ins);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    Ok(u64::from(prev[b.len()]))
}

// Traceback moves, two bits per interior DP cell.
const MV_DIAG: u8 = 0;
const MV_UP: u8 = 1; // consumes tx: deletion
const MV_LEFT: u8 = 2; // consumes rx: insertion

struct MoveTable {
    bits: Vec<u8>,
    cols: usize,
}

impl MoveTable {
    fn new(rows: usize, cols: usize) -> Self {
        Self { bits: vec![0u8; (rows * cols).div_ceil(4)], cols }
    }

    fn set(&mut self, i: usize, j: usize, mv: u8) {
        let cell = i * self.cols + j;
        self.bits[cell / 4] |= mv << ((cell % 4) * 2);
    }

    fn get(&self, i: usize, j: usize) -> u8 {
        let cell = i * self.cols + j;
        (self.bits[cell / 4] >> ((cell % 4) * 2)) & 0b11
    }
}

/// Infers the event sequence explaining `rx` as a minimum-edit corruption of
/// `tx`. Matched positions become `t`, mismatched aligned positions `s`,
/// symbols only in `tx` become `d` and symbols only in `rx` become `i`.
///
/// Ties are resolved during the end-anchored traceback by preferring the
/// diagonal move (t/s), then deletion, then insertion, which pins one
/// canonical path per input pair.
pub fn infer_sync_sequence(
    tx: &SymbolSequence,
    rx: &SymbolSequence,
) -> Result<AlignmentResult, InputError> {
    check_alphabets(tx, rx)?;
    let a = tx.indices();
    let b = rx.indices();
    let (n, m) = (a.len(), b.len());

    let mut moves = MoveTable::new(n, m);
    let mut prev: Vec<u32> = (0..=m as u32).collect();
    let mut cur = vec![0u32; m + 1];
    for i in 1..=n {
        cur[0] = i as u32;
        let ai = a[i - 1];
        for j in 1..=m {
            let diag = prev[j - 1] + u32::from(ai != b[j - 1]);
            let up = prev[j] + 1;
            let left = cur[j - 1] + 1;
            let best = diag.min(up).min(left);
            let mv = if diag == best {
                MV_DIAG
            } else if up == best {
                MV_UP
            } else {
                MV_LEFT
            };
            moves.set(i - 1, j - 1, mv);
            cur[j] = best;
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    let cost = u64::from(prev[m]);

    let mut rev: Vec<SyncState> = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i == 0 {
            rev.push(SyncState::Insertion);
            j -= 1;
        } else if j == 0 {
            rev.push(SyncState::Deletion);
            i -= 1;
        } else {
            match moves.get(i - 1, j - 1) {
                MV_DIAG => {
                    rev.push(if a[i - 1] == b[j - 1] {
                        SyncState::Transmission
                    } else {
                        SyncState::Substitution
                    });
                    i -= 1;
                    j -= 1;
                }
                MV_UP => {
                    rev.push(SyncState::Deletion);
                    i -= 1;
                }
                _ => {
                    rev.push(SyncState::Insertion);
                    j -= 1;
                }
            }
        }
    }
    rev.reverse();
    Ok(AlignmentResult { path: SyncErrorSequence::new(rev), cost })
}

/// Aligns every frame and concatenates the recovered paths.
pub fn align_frames(
    frames: &[(SymbolSequence, SymbolSequence)],
) -> Result<(Vec<AlignmentResult>, SyncErrorSequence), InputError> {
    let mut results = Vec::with_capacity(frames.len());
    let mut concatenated = SyncErrorSequence::default();
    for (tx, rx) in frames {
        let r = infer_sync_sequence(tx, rx)?;
        concatenated.extend_from(&r.path);
        results.push(r);
    }
    Ok((results, concatenated))
}
