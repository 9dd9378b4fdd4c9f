//! Alphabets, encoded sequence records, and k-mer extraction.
//!
//! Sequences are stored as vectors of alphabet indices so that downstream
//! code compares symbols by `u8` equality regardless of the source alphabet.
//! All types here are immutable after construction and safe to share across
//! concurrent pair computations.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// The 20 standard amino acids in alphabetical one-letter order.
const PROTEIN_SYMBOLS: &str = "ACDEFGHIKLMNPQRSTVWY";

/// An indexed symbol set. `index(symbol)` is a bijection onto `0..size()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<char>,
    index: HashMap<char, u8>,
}

impl Alphabet {
    /// DNA alphabet in the fixed order A, C, G, T.
    pub fn dna() -> Self {
        Self::from_symbols("ACGT").expect("preset is valid")
    }

    /// Protein alphabet: the 20 standard amino acids, alphabetical order.
    pub fn protein() -> Self {
        Self::from_symbols(PROTEIN_SYMBOLS).expect("preset is valid")
    }

    /// Builds an alphabet from an explicit symbol list, preserving order.
    /// Matching is case-insensitive; symbols are canonicalized to uppercase.
    pub fn from_symbols(symbols: &str) -> Result<Self> {
        let canonical: Vec<char> = symbols.chars().flat_map(|c| c.to_uppercase()).collect();
        if canonical.len() < 2 {
            return Err(Error::InvalidParam(format!(
                "alphabet needs at least 2 symbols, got {}",
                canonical.len()
            )));
        }
        if canonical.len() > u8::MAX as usize {
            return Err(Error::InvalidParam(format!(
                "alphabet too large: {} symbols",
                canonical.len()
            )));
        }
        let mut index = HashMap::new();
        for (i, &c) in canonical.iter().enumerate() {
            if index.insert(c, i as u8).is_some() {
                return Err(Error::InvalidParam(format!("duplicate symbol '{c}'")));
            }
        }
        Ok(Self {
            symbols: canonical,
            index,
        })
    }

    /// Parses a named preset (`dna`, `protein`) or an explicit symbol list.
    pub fn from_spec(spec: &str) -> Result<Self> {
        match spec.to_ascii_lowercase().as_str() {
            "dna" => Ok(Self::dna()),
            "protein" => Ok(Self::protein()),
            _ => Self::from_symbols(spec),
        }
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    /// Index of a symbol, matching case-insensitively.
    pub fn index_of(&self, c: char) -> Option<u8> {
        let c = c.to_ascii_uppercase();
        self.index.get(&c).copied()
    }

    pub fn symbol(&self, idx: u8) -> char {
        self.symbols[idx as usize]
    }

    /// Encodes a string into alphabet indices. `position` in errors is 1-based.
    pub fn encode(&self, id: &str, text: &str) -> Result<Vec<u8>> {
        text.chars()
            .enumerate()
            .map(|(pos, c)| {
                self.index_of(c).ok_or(Error::UnknownSymbol {
                    id: id.to_string(),
                    symbol: c,
                    position: pos + 1,
                })
            })
            .collect()
    }

    pub fn decode(&self, residues: &[u8]) -> String {
        residues.iter().map(|&r| self.symbol(r)).collect()
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.symbols {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// One encoded sequence with its identifier and optional class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceRecord {
    pub id: String,
    pub residues: Vec<u8>,
    pub label: Option<String>,
}

impl SequenceRecord {
    pub fn new(id: impl Into<String>, residues: Vec<u8>) -> Self {
        Self {
            id: id.into(),
            residues,
            label: None,
        }
    }

    /// Encodes `text` under `alphabet`.
    pub fn encode(id: impl Into<String>, text: &str, alphabet: &Alphabet) -> Result<Self> {
        let id = id.into();
        let residues = alphabet.encode(&id, text)?;
        Ok(Self {
            id,
            residues,
            label: None,
        })
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }
}

/// The multiset of length-k windows of a sequence, in position order.
///
/// Duplicates are preserved: pair counts downstream are over occurrence
/// pairs, not distinct k-mers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KmerSet {
    pub k: usize,
    pub kmers: Vec<Vec<u8>>,
}

impl KmerSet {
    pub fn len(&self) -> usize {
        self.kmers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kmers.is_empty()
    }
}

/// All length-k windows in position order; a sequence shorter than k
/// yields an empty set.
pub fn extract_kmers(seq: &SequenceRecord, k: usize) -> KmerSet {
    assert!(k >= 1, "k must be positive");
    let kmers = if seq.len() >= k {
        seq.residues.windows(k).map(|w| w.to_vec()).collect()
    } else {
        Vec::new()
    };
    KmerSet { k, kmers }
}

/// Reads a FASTA file, validating every residue against `alphabet`.
///
/// Header lines begin with '>'; the record id is the first
/// whitespace-delimited token of the header. Sequence lines may wrap.
pub fn load_fasta(path: impl AsRef<Path>, alphabet: &Alphabet) -> Result<Vec<SequenceRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_fasta(&text, alphabet, &path.display().to_string())
}

pub fn parse_fasta(text: &str, alphabet: &Alphabet, path: &str) -> Result<Vec<SequenceRecord>> {
    let mut records: Vec<SequenceRecord> = Vec::new();
    let mut seen = HashMap::new();
    let mut current: Option<(String, String)> = None;

    let flush =
        |current: &mut Option<(String, String)>, records: &mut Vec<SequenceRecord>| -> Result<()> {
            if let Some((id, seq)) = current.take() {
                records.push(SequenceRecord::encode(id, &seq, alphabet)?);
            }
            Ok(())
        };

    for line in text.lines() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            flush(&mut current, &mut records)?;
            let id = header
                .split_whitespace()
                .next()
                .ok_or_else(|| Error::Format {
                    path: path.to_string(),
                    msg: "empty FASTA header".to_string(),
                })?
                .to_string();
            if seen.insert(id.clone(), ()).is_some() {
                return Err(Error::DuplicateId(id));
            }
            current = Some((id, String::new()));
        } else {
            match current {
                Some((_, ref mut seq)) => seq.push_str(line.trim()),
                None => {
                    return Err(Error::Format {
                        path: path.to_string(),
                        msg: "sequence data before first '>' header".to_string(),
                    })
                }
            }
        }
    }
    flush(&mut current, &mut records)?;

    if records.is_empty() {
        return Err(Error::Format {
            path: path.to_string(),
            msg: "no FASTA records found".to_string(),
        });
    }
    Ok(records)
}

/// Writes records back out as FASTA, ids preserved, one line per sequence.
pub fn write_fasta(
    path: impl AsRef<Path>,
    records: &[SequenceRecord],
    alphabet: &Alphabet,
) -> Result<()> {
    let mut out = String::new();
    for rec in records {
        out.push('>');
        out.push_str(&rec.id);
        out.push('\n');
        out.push_str(&alphabet.decode(&rec.residues));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Loads a two-column `id,label` CSV (header row required).
pub fn load_labels(path: impl AsRef<Path>) -> Result<HashMap<String, String>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Format {
                path: path.display().to_string(),
                msg: format!("{other:?}"),
            },
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Format {
            path: path.display().to_string(),
            msg: format!("cannot read header row: {e}"),
        })?
        .clone();
    if headers.len() < 2 {
        return Err(Error::Format {
            path: path.display().to_string(),
            msg: format!("expected columns 'id,label', got {} column(s)", headers.len()),
        });
    }

    let mut map = HashMap::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Format {
            path: path.display().to_string(),
            msg: format!("row {}: {e}", row + 2),
        })?;
        let id = record.get(0).unwrap_or("").to_string();
        let label = record
            .get(1)
            .ok_or_else(|| Error::Format {
                path: path.display().to_string(),
                msg: format!("row {}: missing label column", row + 2),
            })?
            .to_string();
        if map.insert(id.clone(), label).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    Ok(map)
}

/// Attaches labels from `labels` to matching records, erroring on records
/// with no label entry.
pub fn apply_labels(
    records: &mut [SequenceRecord],
    labels: &HashMap<String, String>,
) -> Result<()> {
    for rec in records.iter_mut() {
        match labels.get(&rec.id) {
            Some(label) => rec.label = Some(label.clone()),
            None => {
                return Err(Error::InvalidParam(format!(
                    "record '{}' has no label",
                    rec.id
                )))
            }
        }
    }
    Ok(())
}
