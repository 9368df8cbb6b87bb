//! Code tables over finite alphabets.
//!
//! Covers the two classical coding schemes: non-singular coding (every unit
//! gets a distinct string) and uniquely decodable coding (every concatenation
//! of codewords segments one way only). Provides the optimal code-length
//! formulas for both schemes in hard (integer) and soft (real) form,
//! enumeration of shortest codes, Elias gamma codes, a Sardinas–Patterson
//! decodability check, and the Kraft sum.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

/// Cap on distinct dangling suffixes derived during the decodability check.
pub const MAX_DANGLING_SUFFIXES: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum CodingError {
    #[error("alphabet needs at least two symbols, got {0}")]
    AlphabetTooSmall(usize),
    #[error("alphabet symbol {0:?} repeats")]
    DuplicateSymbol(char),
    #[error("rank must be at least 1")]
    RankOutOfRange,
    #[error("probability must lie in (0, 1], got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("code for rank {rank} is empty")]
    EmptyCode { rank: usize },
    #[error("code for rank {rank} uses {symbol:?}, which is not in the alphabet")]
    ForeignSymbol { rank: usize, symbol: char },
    #[error("Elias gamma codes need a binary alphabet, got {0} symbols")]
    NotBinary(usize),
    #[error("symbol {symbol:?} at offset {offset} is not in the alphabet")]
    UnknownSymbol { offset: usize, symbol: char },
    #[error("truncated codeword at symbol offset {0}")]
    MalformedStream(usize),
    #[error("decodability check exceeded {0} dangling suffixes")]
    SuffixOverflow(usize),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// An ordered set of distinct symbols. Order defines lexicographic rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new<I: IntoIterator<Item = char>>(symbols: I) -> Result<Self, CodingError> {
        let symbols: Vec<char> = symbols.into_iter().collect();
        if symbols.len() < 2 {
            return Err(CodingError::AlphabetTooSmall(symbols.len()));
        }
        let mut seen = HashSet::new();
        for &s in &symbols {
            if !seen.insert(s) {
                return Err(CodingError::DuplicateSymbol(s));
            }
        }
        Ok(Self { symbols })
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: char) -> Option<usize> {
        self.symbols.iter().position(|&s| s == symbol)
    }
}

impl std::str::FromStr for Alphabet {
    type Err = CodingError;

    fn from_str(s: &str) -> Result<Self, CodingError> {
        Alphabet::new(s.chars())
    }
}

/// The two coding schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    NonSingular,
    UniquelyDecodable,
}

/// A mapping from unit ranks 1..=n to codewords over one alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeTable {
    alphabet: Alphabet,
    codes: Vec<String>,
}

impl CodeTable {
    /// `codes[i]` is the code for rank `i + 1`. Codes must be non-empty
    /// strings over the alphabet.
    pub fn new(alphabet: Alphabet, codes: Vec<String>) -> Result<Self, CodingError> {
        for (i, code) in codes.iter().enumerate() {
            if code.is_empty() {
                return Err(CodingError::EmptyCode { rank: i + 1 });
            }
            for symbol in code.chars() {
                if alphabet.index_of(symbol).is_none() {
                    return Err(CodingError::ForeignSymbol {
                        rank: i + 1,
                        symbol,
                    });
                }
            }
        }
        Ok(Self { alphabet, codes })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    /// Code for a 1-based rank.
    pub fn code(&self, rank: usize) -> Option<&str> {
        self.codes.get(rank.checked_sub(1)?).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Codeword lengths in symbols, by rank.
    pub fn lengths(&self) -> Vec<usize> {
        self.codes.iter().map(|c| c.chars().count()).collect()
    }

    /// Two-column text form: rank and code, tab-separated, one entry per line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, code) in self.codes.iter().enumerate() {
            out.push_str(&format!("{}\t{}\n", i + 1, code));
        }
        out
    }

    /// Parses the two-column form. Blank lines and lines starting with `#`
    /// are skipped; ranks must run 1..=n with no gaps.
    pub fn from_tsv(text: &str, alphabet: Alphabet) -> Result<Self, CodingError> {
        let mut codes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_number = lineno + 1;
            let trimmed = line.trim_end_matches('\r');
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (rank_field, code) = trimmed.split_once('\t').ok_or(CodingError::Parse {
                line: line_number,
                reason: "expected rank<TAB>code".into(),
            })?;
            let rank: usize = rank_field.parse().map_err(|_| CodingError::Parse {
                line: line_number,
                reason: format!("bad rank {rank_field:?}"),
            })?;
            if rank != codes.len() + 1 {
                return Err(CodingError::Parse {
                    line: line_number,
                    reason: format!("rank {} out of order, expected {}", rank, codes.len() + 1),
                });
            }
            codes.push(code.to_string());
        }
        CodeTable::new(alphabet, codes)
    }
}

fn check_base(base: usize) -> Result<(), CodingError> {
    if base < 2 {
        return Err(CodingError::AlphabetTooSmall(base));
    }
    Ok(())
}

/// Length of the rank-th string in length-then-lexicographic order over
/// `base` symbols: the smallest L with N + N^2 + ... + N^L >= rank.
///
/// Integer shell counting; immune to the boundary misrounding the closed
/// form is exposed to.
pub fn nonsingular_length_hard(rank: u64, base: usize) -> Result<u32, CodingError> {
    check_base(base)?;
    if rank == 0 {
        return Err(CodingError::RankOutOfRange);
    }
    let n = base as u128;
    let mut shell: u128 = 1;
    let mut covered: u128 = 0;
    let mut length = 0u32;
    loop {
        shell *= n;
        covered += shell;
        length += 1;
        if covered >= rank as u128 {
            return Ok(length);
        }
    }
}

/// Closed-form ceiling evaluation of the same quantity; kept as a
/// cross-check of the shell count. Reliable for ranks up to ~1e9.
pub fn nonsingular_length_hard_ceil(rank: u64, base: usize) -> Result<u32, CodingError> {
    check_base(base)?;
    if rank == 0 {
        return Err(CodingError::RankOutOfRange);
    }
    let n = base as f64;
    let x = (n - 1.0) / n * (rank as f64) + 1.0;
    // Nudge below exact integers so shell boundaries round down, not up.
    Ok((x.ln() / n.ln() - 1e-12).ceil() as u32)
}

/// Soft non-singular optimum: log_N(rank).
pub fn nonsingular_length_soft(rank: u64, base: usize) -> Result<f64, CodingError> {
    check_base(base)?;
    if rank == 0 {
        return Err(CodingError::RankOutOfRange);
    }
    Ok((rank as f64).ln() / (base as f64).ln())
}

/// Hard uniquely decodable optimum: ceil(-log_N p), clamped to at least one
/// symbol so a certain unit still gets a non-empty code.
pub fn ud_length_hard(p: f64, base: usize) -> Result<u32, CodingError> {
    check_base(base)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(CodingError::ProbabilityOutOfRange(p));
    }
    let x = -p.ln() / (base as f64).ln();
    // Snap to the nearest integer when p is an exact power of the base, where
    // the log can land a few ulps on either side.
    let nearest = x.round();
    let ceiled = if (x - nearest).abs() < 1e-9 { nearest } else { x.ceil() };
    Ok(ceiled.max(1.0) as u32)
}

/// Soft uniquely decodable optimum: -log_N p.
pub fn ud_length_soft(p: f64, base: usize) -> Result<f64, CodingError> {
    check_base(base)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(CodingError::ProbabilityOutOfRange(p));
    }
    Ok(-p.ln() / (base as f64).ln())
}

/// The first `count` non-empty strings over the alphabet in
/// length-then-lexicographic order, as a code table. Entry i has length
/// `nonsingular_length_hard(i, N)`.
pub fn enumerate_nonsingular_codes(count: usize, alphabet: &Alphabet) -> CodeTable {
    let n = alphabet.size() as u64;
    let symbols = alphabet.symbols();
    let mut codes = Vec::with_capacity(count);
    let mut shell_first: u64 = 1; // rank of the first string of the current length
    let mut shell_size: u64 = n;
    let mut length: u32 = 1;
    for rank in 1..=count as u64 {
        while rank >= shell_first + shell_size {
            shell_first += shell_size;
            shell_size *= n;
            length += 1;
        }
        let mut offset = rank - shell_first;
        let mut code = vec!['\0'; length as usize];
        for slot in code.iter_mut().rev() {
            *slot = symbols[(offset % n) as usize];
            offset /= n;
        }
        codes.push(code.into_iter().collect());
    }
    CodeTable {
        alphabet: alphabet.clone(),
        codes,
    }
}

/// Elias gamma code for a rank: floor(log2 rank) zero-symbols followed by the
/// binary expansion of the rank. The first alphabet symbol plays the zero
/// digit, the second the one digit.
pub fn elias_gamma_encode(rank: u64, alphabet: &Alphabet) -> Result<String, CodingError> {
    if alphabet.size() != 2 {
        return Err(CodingError::NotBinary(alphabet.size()));
    }
    if rank == 0 {
        return Err(CodingError::RankOutOfRange);
    }
    let zero = alphabet.symbols()[0];
    let one = alphabet.symbols()[1];
    let bits = 63 - rank.leading_zeros(); // floor(log2 rank)
    let mut out = String::with_capacity(2 * bits as usize + 1);
    for _ in 0..bits {
        out.push(zero);
    }
    for k in (0..=bits).rev() {
        out.push(if (rank >> k) & 1 == 1 { one } else { zero });
    }
    Ok(out)
}

/// Segments a concatenation of Elias gamma codewords and decodes each rank.
pub fn elias_gamma_decode(stream: &str, alphabet: &Alphabet) -> Result<Vec<u64>, CodingError> {
    if alphabet.size() != 2 {
        return Err(CodingError::NotBinary(alphabet.size()));
    }
    let zero = alphabet.symbols()[0];
    let one = alphabet.symbols()[1];
    let symbols: Vec<char> = stream.chars().collect();
    let mut ranks = Vec::new();
    let mut pos = 0usize;
    while pos < symbols.len() {
        let start = pos;
        while pos < symbols.len() && symbols[pos] == zero {
            pos += 1;
        }
        let prefix = pos - start;
        if pos == symbols.len() {
            return Err(CodingError::MalformedStream(start));
        }
        if symbols[pos] != one {
            return Err(CodingError::UnknownSymbol {
                offset: pos,
                symbol: symbols[pos],
            });
        }
        // a 63-zero prefix still decodes within u64
        if prefix > 63 || pos + prefix >= symbols.len() {
            return Err(CodingError::MalformedStream(start));
        }
        let mut value: u64 = 1;
        for k in 1..=prefix {
            let s = symbols[pos + k];
            let bit = if s == one {
                1
            } else if s == zero {
                0
            } else {
                return Err(CodingError::UnknownSymbol {
                    offset: pos + k,
                    symbol: s,
                });
            };
            value = (value << 1) | bit;
        }
        ranks.push(value);
        pos += prefix + 1;
    }
    Ok(ranks)
}

/// True iff all codes are pairwise distinct.
pub fn is_nonsingular(table: &CodeTable) -> bool {
    let mut seen = HashSet::with_capacity(table.len());
    table.codes().iter().all(|c| seen.insert(c.as_str()))
}

/// Sardinas–Patterson test. Singular tables are not uniquely decodable and
/// return `false` immediately. Errs if the set of derived dangling suffixes
/// grows past [`MAX_DANGLING_SUFFIXES`].
pub fn is_uniquely_decodable(table: &CodeTable) -> Result<bool, CodingError> {
    if !is_nonsingular(table) {
        return Ok(false);
    }
    let codes: HashSet<&str> = table.codes().iter().map(String::as_str).collect();
    let mut seen: HashSet<String> = HashSet::new();
    let mut frontier: Vec<String> = Vec::new();

    let push = |suffix: &str,
                    seen: &mut HashSet<String>,
                    frontier: &mut Vec<String>|
     -> Result<bool, CodingError> {
        if codes.contains(suffix) {
            return Ok(true); // a dangling suffix that is itself a codeword
        }
        if seen.insert(suffix.to_string()) {
            if seen.len() > MAX_DANGLING_SUFFIXES {
                return Err(CodingError::SuffixOverflow(MAX_DANGLING_SUFFIXES));
            }
            frontier.push(suffix.to_string());
        }
        Ok(false)
    };

    for a in &codes {
        for b in &codes {
            if a != b && b.starts_with(a) && push(&b[a.len()..], &mut seen, &mut frontier)? {
                return Ok(false);
            }
        }
    }
    while let Some(w) = frontier.pop() {
        for c in &codes {
            if c.starts_with(w.as_str())
                && c.len() > w.len()
                && push(&c[w.len()..], &mut seen, &mut frontier)?
            {
                return Ok(false);
            }
            if w.starts_with(c)
                && w.len() > c.len()
                && push(&w[c.len()..], &mut seen, &mut frontier)?
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Kraft sum over the table's codeword lengths: sum of N^(-|code|).
pub fn kraft_sum(table: &CodeTable) -> f64 {
    let n = table.alphabet().size() as f64;
    table
        .lengths()
        .iter()
        .map(|&l| n.powi(-(l as i32)))
        .sum()
}
