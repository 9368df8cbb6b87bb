//! Loading frequency tables for `fit` and `classify`.
//!
//! Two on-disk shapes are accepted and told apart by their header: the rank
//! table written by `analyze` (`rank,token,count,probability,length`) and the
//! plain `token,count,length` table. Both may carry `#` comment lines.

use std::fs;
use std::io::Read;

use ranklaw::corpus;
use ranklaw::rank::{self, LengthProfile, RankDistribution, RankTableRow};

use crate::CliError;

pub struct LoadedTable {
    pub rows: Vec<RankTableRow>,
}

pub fn read_input(path: &str) -> Result<Vec<u8>, CliError> {
    if path == "-" {
        let mut buf = Vec::new();
        std::io::stdin()
            .lock()
            .read_to_end(&mut buf)
            .map_err(|e| CliError::new(2, format!("reading standard input: {e}")))?;
        Ok(buf)
    } else {
        fs::read(path).map_err(|e| CliError::new(2, format!("reading {path}: {e}")))
    }
}

pub fn load_table(path: &str) -> Result<LoadedTable, CliError> {
    let bytes = read_input(path)?;
    if bytes.is_empty() {
        return Err(CliError::new(3, format!("{path}: table is empty")));
    }
    let header = first_data_line(&bytes)
        .ok_or_else(|| CliError::new(3, format!("{path}: table is empty")))?;

    let rows = if header.starts_with("rank,") {
        rank::read_rank_table(bytes.as_slice())
            .map_err(|e| CliError::new(2, format!("{path}: {e}")))?
    } else if header.starts_with("token,") {
        let table = corpus::read_table(bytes.as_slice())
            .map_err(|e| CliError::new(2, format!("{path}: {e}")))?;
        let total = table.total_tokens() as f64;
        table
            .rows()
            .iter()
            .enumerate()
            .map(|(i, row)| RankTableRow {
                rank: i + 1,
                token: Some(row.token.clone()),
                count: Some(row.count),
                probability: row.count as f64 / total,
                length: Some(row.length as f64),
            })
            .collect()
    } else {
        return Err(CliError::new(
            2,
            format!("{path}: unrecognized table header {header:?}"),
        ));
    };

    if rows.is_empty() {
        return Err(CliError::new(3, format!("{path}: table has no rows")));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.rank != i + 1 {
            return Err(CliError::new(
                2,
                format!("{path}: rank {} out of order, expected {}", row.rank, i + 1),
            ));
        }
    }
    Ok(LoadedTable { rows })
}

impl LoadedTable {
    pub fn counts(&self) -> Option<Vec<u64>> {
        self.rows.iter().map(|r| r.count).collect()
    }

    /// Distribution from counts when the column is complete, otherwise from
    /// the probability column.
    pub fn distribution(&self) -> Result<RankDistribution, CliError> {
        match self.counts() {
            Some(counts) => RankDistribution::from_sorted_counts(counts)
                .map_err(|e| CliError::new(2, format!("table counts: {e}"))),
            None => {
                let probs: Vec<f64> = self.rows.iter().map(|r| r.probability).collect();
                RankDistribution::new(probs)
                    .map_err(|e| CliError::new(2, format!("table probabilities: {e}")))
            }
        }
    }

    pub fn lengths(&self) -> Result<LengthProfile, CliError> {
        let lengths: Option<Vec<f64>> = self.rows.iter().map(|r| r.length).collect();
        let lengths =
            lengths.ok_or_else(|| CliError::new(2, "table has no length column".to_string()))?;
        LengthProfile::new(lengths).map_err(|e| CliError::new(2, format!("table lengths: {e}")))
    }
}

fn first_data_line(bytes: &[u8]) -> Option<String> {
    let text = String::from_utf8_lossy(bytes);
    text.lines()
        .map(str::trim_start)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
}
