//! Corpus ingestion: streaming tokenization and (token, count, length)
//! tables feeding the rank statistics.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::io::{self, BufRead};

use serde::Serialize;
use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

use crate::rank::{LengthProfile, RankDistribution, RankError};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid UTF-8 at byte offset {offset}")]
    Encoding { offset: u64 },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("table is empty")]
    EmptyTable,
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: duplicate token {token:?}")]
    DuplicateToken { token: String, line: usize },
    #[error("cannot merge tables with different length units")]
    UnitMismatch,
    #[error(transparent)]
    Rank(#[from] RankError),
}

/// Unit in which token lengths are measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthUnit {
    /// Extended grapheme clusters; the default, closest to what a reader
    /// perceives as characters.
    #[default]
    Graphemes,
    CodePoints,
    Bytes,
}

/// Token length under a unit.
pub fn measure_length(token: &str, unit: LengthUnit) -> u64 {
    match unit {
        LengthUnit::Graphemes => token.graphemes(true).count() as u64,
        LengthUnit::CodePoints => token.chars().count() as u64,
        LengthUnit::Bytes => token.len() as u64,
    }
}

/// How the raw text is cut into tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitter {
    /// Unicode word boundaries (UAX #29 word segmentation, words only).
    UnicodeWords,
    /// Maximal runs of non-whitespace.
    Whitespace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TokenizerOptions {
    pub lowercase: bool,
    pub splitter: Splitter,
}

impl Default for TokenizerOptions {
    fn default() -> Self {
        Self {
            lowercase: false,
            splitter: Splitter::UnicodeWords,
        }
    }
}

/// Streaming tokenizer over a UTF-8 reader. Tokens never span line breaks
/// (a break is a boundary for both splitters), so the input is validated and
/// segmented line by line; invalid UTF-8 is reported with its byte offset.
pub struct TokenIter<R: BufRead> {
    reader: R,
    options: TokenizerOptions,
    queue: std::vec::IntoIter<String>,
    consumed: u64,
    failed: bool,
}

pub fn tokenize_stream<R: BufRead>(reader: R, options: TokenizerOptions) -> TokenIter<R> {
    TokenIter {
        reader,
        options,
        queue: Vec::new().into_iter(),
        consumed: 0,
        failed: false,
    }
}

impl<R: BufRead> TokenIter<R> {
    fn refill(&mut self) -> Result<bool, CorpusError> {
        let mut raw = Vec::new();
        loop {
            raw.clear();
            let read = self.reader.read_until(b'\n', &mut raw)?;
            if read == 0 {
                return Ok(false);
            }
            let line = std::str::from_utf8(&raw).map_err(|e| CorpusError::Encoding {
                offset: self.consumed + e.valid_up_to() as u64,
            })?;
            self.consumed += read as u64;
            let tokens: Vec<String> = match self.options.splitter {
                Splitter::UnicodeWords => line.unicode_words().map(str::to_string).collect(),
                Splitter::Whitespace => line.split_whitespace().map(str::to_string).collect(),
            };
            if tokens.is_empty() {
                continue;
            }
            self.queue = if self.options.lowercase {
                tokens
                    .into_iter()
                    .map(|t| t.to_lowercase())
                    .collect::<Vec<_>>()
                    .into_iter()
            } else {
                tokens.into_iter()
            };
            return Ok(true);
        }
    }
}

impl<R: BufRead> Iterator for TokenIter<R> {
    type Item = Result<String, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            if let Some(token) = self.queue.next() {
                return Some(Ok(token));
            }
            match self.refill() {
                Ok(true) => continue,
                Ok(false) => return None,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e));
                }
            }
        }
    }
}

/// One table row: a distinct token with its count and measured length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenRow {
    pub token: String,
    pub count: u64,
    pub length: u64,
}

/// Distinct tokens sorted by count descending, ties by first occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenTable {
    rows: Vec<TokenRow>,
    total: u64,
    unit: Option<LengthUnit>,
}

impl TokenTable {
    pub fn rows(&self) -> &[TokenRow] {
        &self.rows
    }

    /// Number of tokens consumed, i.e. the sum of all counts.
    pub fn total_tokens(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// The unit lengths were measured in; unknown for tables read from disk.
    pub fn unit(&self) -> Option<LengthUnit> {
        self.unit
    }
}

/// Incremental counter. Shards of a stream can be counted independently and
/// merged: the counter records each token's absolute first position, so the
/// merge is associative and commutative and reproduces single-pass order.
#[derive(Debug)]
pub struct TokenCounter {
    unit: LengthUnit,
    next_position: u64,
    entries: HashMap<String, (u64, u64)>, // count, first position
}

impl TokenCounter {
    pub fn new(unit: LengthUnit) -> Self {
        Self::starting_at(unit, 0)
    }

    /// Counter for a shard whose first token sits at stream position
    /// `offset`.
    pub fn starting_at(unit: LengthUnit, offset: u64) -> Self {
        Self {
            unit,
            next_position: offset,
            entries: HashMap::new(),
        }
    }

    pub fn push(&mut self, token: impl Into<String>) {
        let position = self.next_position;
        self.next_position += 1;
        match self.entries.entry(token.into()) {
            Entry::Occupied(mut slot) => slot.get_mut().0 += 1,
            Entry::Vacant(slot) => {
                slot.insert((1, position));
            }
        }
    }

    pub fn merge(mut self, other: TokenCounter) -> Result<TokenCounter, CorpusError> {
        if self.unit != other.unit {
            return Err(CorpusError::UnitMismatch);
        }
        for (token, (count, first)) in other.entries {
            match self.entries.entry(token) {
                Entry::Occupied(mut slot) => {
                    let v = slot.get_mut();
                    v.0 += count;
                    v.1 = v.1.min(first);
                }
                Entry::Vacant(slot) => {
                    slot.insert((count, first));
                }
            }
        }
        self.next_position = self.next_position.max(other.next_position);
        Ok(self)
    }

    pub fn finish(self) -> TokenTable {
        let unit = self.unit;
        let mut entries: Vec<(String, u64, u64)> = self
            .entries
            .into_iter()
            .map(|(token, (count, first))| (token, count, first))
            .collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
        let mut total = 0u64;
        let rows = entries
            .into_iter()
            .map(|(token, count, _)| {
                total += count;
                let length = measure_length(&token, unit);
                TokenRow {
                    token,
                    count,
                    length,
                }
            })
            .collect();
        TokenTable {
            rows,
            total,
            unit: Some(unit),
        }
    }
}

/// Counts a plain token sequence.
pub fn count_tokens<I, S>(tokens: I, unit: LengthUnit) -> TokenTable
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut counter = TokenCounter::new(unit);
    for token in tokens {
        counter.push(token);
    }
    counter.finish()
}

/// Tokenizes a reader and counts in one pass.
pub fn count_stream<R: BufRead>(
    reader: R,
    options: TokenizerOptions,
    unit: LengthUnit,
) -> Result<TokenTable, CorpusError> {
    let mut counter = TokenCounter::new(unit);
    for token in tokenize_stream(reader, options) {
        counter.push(token?);
    }
    Ok(counter.finish())
}

/// Splits a table into the rank distribution and the aligned length profile.
pub fn to_rank_data(table: &TokenTable) -> Result<(RankDistribution, LengthProfile), CorpusError> {
    if table.is_empty() {
        return Err(CorpusError::EmptyTable);
    }
    let counts: Vec<u64> = table.rows().iter().map(|r| r.count).collect();
    let dist = RankDistribution::from_sorted_counts(counts)?;
    let profile = LengthProfile::from_integers(table.rows().iter().map(|r| r.length))?;
    Ok((dist, profile))
}

/// Reads the `token,count,length` CSV format. `#` lines are comments. Rows
/// are taken in file order; duplicate tokens are an error.
pub fn read_table<R: io::Read>(reader: R) -> Result<TokenTable, CorpusError> {
    let mut input = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = input.headers().map_err(|e| CorpusError::Parse {
        line: 1,
        reason: e.to_string(),
    })?;
    if headers.iter().ne(["token", "count", "length"]) {
        return Err(CorpusError::Parse {
            line: 1,
            reason: "expected header token,count,length".into(),
        });
    }
    let mut seen: HashMap<String, ()> = HashMap::new();
    let mut rows = Vec::new();
    let mut total = 0u64;
    for record in input.records() {
        let record = record.map_err(|e| CorpusError::Parse {
            line: 0,
            reason: e.to_string(),
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(rows.len() + 2);
        if record.len() != 3 {
            return Err(CorpusError::Parse {
                line,
                reason: format!("expected 3 fields, got {}", record.len()),
            });
        }
        let token = record.get(0).unwrap_or("").to_string();
        let count: u64 = record.get(1).unwrap_or("").parse().map_err(|_| {
            CorpusError::Parse {
                line,
                reason: format!("bad count {:?}", record.get(1).unwrap_or("")),
            }
        })?;
        let length: u64 = record.get(2).unwrap_or("").parse().map_err(|_| {
            CorpusError::Parse {
                line,
                reason: format!("bad length {:?}", record.get(2).unwrap_or("")),
            }
        })?;
        if count == 0 {
            return Err(CorpusError::Parse {
                line,
                reason: "count must be positive".into(),
            });
        }
        if seen.insert(token.clone(), ()).is_some() {
            return Err(CorpusError::DuplicateToken { token, line });
        }
        total = total.checked_add(count).ok_or(CorpusError::Parse {
            line,
            reason: "total count overflows".into(),
        })?;
        rows.push(TokenRow {
            token,
            count,
            length,
        });
    }
    Ok(TokenTable {
        rows,
        total,
        unit: None,
    })
}

/// Writes the `token,count,length` CSV format (RFC 4180 quoting).
pub fn write_table<W: io::Write>(writer: W, table: &TokenTable) -> Result<(), CorpusError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["token", "count", "length"])
        .map_err(|e| CorpusError::Parse {
            line: 0,
            reason: e.to_string(),
        })?;
    for row in table.rows() {
        out.write_record([
            row.token.as_str(),
            &row.count.to_string(),
            &row.length.to_string(),
        ])
        .map_err(|e| CorpusError::Parse {
            line: 0,
            reason: e.to_string(),
        })?;
    }
    out.flush()?;
    Ok(())
}
