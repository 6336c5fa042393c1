//! Alphabets and the three sequence types everything else operates on.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::InputError;

/// Ordered set of distinct channel symbols. Needs at least two symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new<I: IntoIterator<Item = char>>(symbols: I) -> Result<Self, InputError> {
        let symbols: Vec<char> = symbols.into_iter().collect();
        for (n, &c) in symbols.iter().enumerate() {
            if symbols[..n].contains(&c) {
                return Err(InputError::DuplicateSymbol { symbol: c });
            }
        }
        if symbols.len() < 2 {
            return Err(InputError::AlphabetTooSmall { size: symbols.len() });
        }
        Ok(Self { symbols })
    }

    /// The `{'0', '1'}` alphabet.
    pub fn binary() -> Self {
        Self { symbols: alloc::vec!['0', '1'] }
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: char) -> Option<u32> {
        self.symbols.iter().position(|&c| c == symbol).map(|p| p as u32)
    }

    pub fn symbol(&self, index: u32) -> Option<char> {
        self.symbols.get(index as usize).copied()
    }
}

/// Sequence of symbol indices over a fixed alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSequence {
    alphabet: Alphabet,
    data: Vec<u32>,
}

impl SymbolSequence {
    pub fn from_indices(alphabet: Alphabet, data: Vec<u32>) -> Result<Self, InputError> {
        let q = alphabet.size();
        if let Some(&bad) = data.iter().find(|&&x| x as usize >= q) {
            return Err(InputError::SymbolOutOfRange { index: bad, alphabet_size: q });
        }
        Ok(Self { alphabet, data })
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        Self { alphabet, data: Vec::new() }
    }

    /// Parses one character per symbol.
    pub fn parse(alphabet: &Alphabet, text: &str) -> Result<Self, InputError> {
        let mut data = Vec::with_capacity(text.len());
        for ch in text.chars() {
            match alphabet.index_of(ch) {
                Some(ix) => data.push(ix),
                None => return Err(InputError::UnknownSymbol { symbol: ch }),
            }
        }
        Ok(Self { alphabet: alphabet.clone(), data })
    }

    pub fn to_text(&self) -> String {
        self.data
            .iter()
            .map(|&ix| self.alphabet.symbol(ix).expect("index validated on construction"))
            .collect()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn indices(&self) -> &[u32] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Per-symbol channel event. The discriminant order (t, s, d, i) is the
/// canonical state order used by every matrix in this crate.
#[repr(u8)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SyncState {
    Transmission = 0,
    Substitution = 1,
    Deletion = 2,
    Insertion = 3,
}

impl SyncState {
    /// Canonical order: t, s, d, i.
    pub const ALL: [SyncState; 4] = [
        SyncState::Transmission,
        SyncState::Substitution,
        SyncState::Deletion,
        SyncState::Insertion,
    ];

    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn as_char(self) -> char {
        match self {
            SyncState::Transmission => 't',
            SyncState::Substitution => 's',
            SyncState::Deletion => 'd',
            SyncState::Insertion => 'i',
        }
    }

    pub fn from_char(ch: char) -> Option<Self> {
        match ch {
            't' => Some(SyncState::Transmission),
            's' => Some(SyncState::Substitution),
            'd' => Some(SyncState::Deletion),
            'i' => Some(SyncState::Insertion),
            _ => None,
        }
    }
}

/// Sequence of per-symbol channel events.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SyncErrorSequence {
    states: Vec<SyncState>,
}

impl SyncErrorSequence {
    pub fn new(states: Vec<SyncState>) -> Self {
        Self { states }
    }

    /// Accepts both the compact form `ttsd` and the comma-separated form
    /// `t,t,s,d`; whitespace between items is ignored.
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let mut states = Vec::new();
        for ch in text.chars() {
            if ch == ',' || ch.is_whitespace() {
                continue;
            }
            match SyncState::from_char(ch) {
                Some(st) => states.push(st),
                None => return Err(InputError::BadSyncChar { ch }),
            }
        }
        Ok(Self { states })
    }

    /// Compact text form, e.g. `ttsd`.
    pub fn to_text(&self) -> String {
        self.states.iter().map(|s| s.as_char()).collect()
    }

    pub fn states(&self) -> &[SyncState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn push(&mut self, state: SyncState) {
        self.states.push(state);
    }

    pub fn extend_from(&mut self, other: &SyncErrorSequence) {
        self.states.extend_from_slice(&other.states);
    }

    /// Counts in canonical (t, s, d, i) order.
    pub fn state_counts(&self) -> [u64; 4] {
        let mut counts = [0u64; 4];
        for st in &self.states {
            counts[st.index()] += 1;
        }
        counts
    }
}

/// Binary error indicator sequence (1 marks an error position).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BinaryErrorSequence {
    bits: Vec<u8>,
}

impl BinaryErrorSequence {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self, InputError> {
        if let Some(&bad) = bits.iter().find(|&&b| b > 1) {
            return Err(InputError::BadBinaryChar { ch: (b'0' + bad.min(9)) as char });
        }
        Ok(Self { bits })
    }

    pub fn parse(text: &str) -> Result<Self, InputError> {
        let mut bits = Vec::new();
        for ch in text.chars() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                ',' => {}
                c if c.is_whitespace() => {}
                c => return Err(InputError::BadBinaryChar { ch: c }),
            }
        }
        Ok(Self { bits })
    }

    pub fn to_text(&self) -> String {
        self.bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> u64 {
        self.bits.iter().map(|&b| u64::from(b)).sum()
    }
}
