//! Frame file ingestion: JSONL and tab-separated tx/rx pairs.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use idschan_core::{Alphabet, SymbolSequence};

/// One transmitted/received pair as it appears on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_id: u64,
    pub tx: String,
    pub rx: String,
}

/// On-disk layout of a frame file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameFormat {
    /// One JSON object per line: {"frame_id": n, "tx": "...", "rx": "..."}.
    Jsonl,
    /// One tab-separated tx/rx pair per line; frame ids are assigned in
    /// file order.
    Tsv,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: symbol {symbol:?} not in alphabet {alphabet:?}")]
    AlphabetConflict { line: usize, symbol: char, alphabet: String },
    #[error("line {line}: tx length {found} but frames are declared {expected} symbols long")]
    FrameLength { line: usize, found: usize, expected: usize },
    #[error("bad alphabet {text:?}: {msg}")]
    BadAlphabet { text: String, msg: String },
    #[error("data uses {found} distinct symbol(s); an alphabet needs at least 2")]
    AlphabetTooSmall { found: usize },
    #[error("input contains no frames")]
    Empty,
}

/// Ingestion knobs. With no declared alphabet the symbol set is inferred
/// from the data; `frame_length` turns on the strict per-frame tx length
/// check.
#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub declared_alphabet: Option<String>,
    pub frame_length: Option<usize>,
}

/// Parsed frame file: raw records plus the symbol sequences they encode.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub alphabet: Alphabet,
    pub records: Vec<FrameRecord>,
    pub frames: Vec<(SymbolSequence, SymbolSequence)>,
}

fn parse_line(line: &str, lineno: usize, format: FrameFormat, next_id: u64) -> Result<FrameRecord, IngestError> {
    match format {
        FrameFormat::Jsonl => serde_json::from_str(line)
            .map_err(|e| IngestError::Malformed { line: lineno, msg: e.to_string() }),
        FrameFormat::Tsv => {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 {
                return Err(IngestError::Malformed {
                    line: lineno,
                    msg: format!("expected 2 tab-separated fields, found {}", fields.len()),
                });
            }
            Ok(FrameRecord { frame_id: next_id, tx: fields[0].to_string(), rx: fields[1].to_string() })
        }
    }
}

/// Reads frame records from `reader`. Blank lines are skipped; anything
/// else that fails to parse is reported with its 1-based line number.
pub fn read_records<R: BufRead>(
    reader: R,
    format: FrameFormat,
    opts: &IngestOptions,
) -> Result<Vec<(usize, FrameRecord)>, IngestError> {
    let mut records = Vec::new();
    for (ix, line) in reader.lines().enumerate() {
        let lineno = ix + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let record = parse_line(&line, lineno, format, records.len() as u64)?;
        if let Some(expected) = opts.frame_length {
            let found = record.tx.chars().count();
            if found != expected {
                return Err(IngestError::FrameLength { line: lineno, found, expected });
            }
        }
        records.push((lineno, record));
    }
    Ok(records)
}

fn resolve_alphabet(
    records: &[(usize, FrameRecord)],
    declared: Option<&str>,
) -> Result<Alphabet, IngestError> {
    if let Some(text) = declared {
        let alphabet = Alphabet::new(text.chars())
            .map_err(|e| IngestError::BadAlphabet { text: text.to_string(), msg: e.to_string() })?;
        for (lineno, record) in records {
            for symbol in record.tx.chars().chain(record.rx.chars()) {
                if alphabet.index_of(symbol).is_none() {
                    return Err(IngestError::AlphabetConflict {
                        line: *lineno,
                        symbol,
                        alphabet: text.to_string(),
                    });
                }
            }
        }
        return Ok(alphabet);
    }
    let seen: BTreeSet<char> = records
        .iter()
        .flat_map(|(_, r)| r.tx.chars().chain(r.rx.chars()))
        .collect();
    // Data that only ever uses 0/1 is binary even when one bit value is
    // absent.
    if !seen.is_empty() && seen.iter().all(|c| *c == '0' || *c == '1') {
        return Ok(Alphabet::binary());
    }
    if seen.len() < 2 {
        return Err(IngestError::AlphabetTooSmall { found: seen.len() });
    }
    Ok(Alphabet::new(seen).expect("distinct sorted symbols"))
}

/// Reads and decodes a whole frame file.
pub fn ingest<R: BufRead>(
    reader: R,
    format: FrameFormat,
    opts: &IngestOptions,
) -> Result<Ingested, IngestError> {
    let numbered = read_records(reader, format, opts)?;
    if numbered.is_empty() {
        return Err(IngestError::Empty);
    }
    let alphabet = resolve_alphabet(&numbered, opts.declared_alphabet.as_deref())?;
    let mut records = Vec::with_capacity(numbered.len());
    let mut frames = Vec::with_capacity(numbered.len());
    for (lineno, record) in numbered {
        let decode = |text: &str| {
            SymbolSequence::parse(&alphabet, text).map_err(|_| {
                let symbol = text
                    .chars()
                    .find(|&c| alphabet.index_of(c).is_none())
                    .unwrap_or('?');
                IngestError::AlphabetConflict {
                    line: lineno,
                    symbol,
                    alphabet: alphabet.symbols().iter().collect(),
                }
            })
        };
        let tx = decode(&record.tx)?;
        let rx = decode(&record.rx)?;
        frames.push((tx, rx));
        records.push(record);
    }
    Ok(Ingested { alphabet, records, frames })
}

pub fn ingest_path(path: &Path, format: FrameFormat, opts: &IngestOptions) -> Result<Ingested, IngestError> {
    let file = File::open(path)?;
    ingest(BufReader::new(file), format, opts)
}

/// Writes records in the given layout; reading the output back yields the
/// same records (TSV regenerates frame ids in file order).
pub fn write_records<W: Write>(
    w: &mut W,
    records: &[FrameRecord],
    format: FrameFormat,
) -> std::io::Result<()> {
    for record in records {
        match format {
            FrameFormat::Jsonl => {
                let line = serde_json::to_string(record).expect("record serializes");
                writeln!(w, "{line}")?;
            }
            FrameFormat::Tsv => writeln!(w, "{}\t{}", record.tx, record.rx)?,
        }
    }
    Ok(())
}

pub fn records_to_string(records: &[FrameRecord], format: FrameFormat) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, records, format).expect("write to vec");
    String::from_utf8(buf).expect("utf8 output")
}
