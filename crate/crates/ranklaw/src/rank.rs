//! Rank distributions and their scalar statistics: mean code length, mean
//! log-rank, entropy, Kendall tau-b, and coding efficiencies under the two
//! schemes.

use std::io;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use thiserror::Error;

use crate::coding::{self, SchemeKind};

/// How far the probabilities of a distribution may drift from summing to one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum RankError {
    #[error("no positive entries")]
    EmptyInput,
    #[error("probabilities must be finite and positive (entry {0})")]
    NonPositiveProbability(usize),
    #[error("probabilities not sorted non-increasingly at entry {0}")]
    NotSorted(usize),
    #[error("probabilities sum to {0}, expected 1 within {NORMALIZATION_TOLERANCE:e}")]
    NotNormalized(f64),
    #[error("lengths must be finite and non-negative (entry {0})")]
    BadLength(usize),
    #[error("dimension mismatch: {expected} vs {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("values must be finite")]
    NonFinite,
    #[error("base must be at least 2, got {0}")]
    InvalidBase(usize),
    #[error("mean length is zero")]
    ZeroMeanLength,
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("rank table line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Probabilities of ranked units, sorted non-increasingly, summing to one.
/// Every rank distribution satisfies p(i) <= 1/i.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDistribution {
    probs: Vec<f64>,
    counts: Option<Vec<u64>>,
}

impl RankDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, RankError> {
        if probs.is_empty() {
            return Err(RankError::EmptyInput);
        }
        let mut sum = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 {
                return Err(RankError::NonPositiveProbability(i));
            }
            if i > 0 && p > probs[i - 1] {
                return Err(RankError::NotSorted(i));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(RankError::NotNormalized(sum));
        }
        Ok(Self {
            probs,
            counts: None,
        })
    }

    /// Builds from raw counts: zeros dropped, the rest sorted descending with
    /// ties keeping their input order, probabilities count/total.
    pub fn from_counts(counts: &[u64]) -> Result<Self, RankError> {
        let mut kept: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
        if kept.is_empty() {
            return Err(RankError::EmptyInput);
        }
        kept.sort_by(|a, b| b.cmp(a)); // stable, so ties keep input order
        Self::from_sorted_counts(kept)
    }

    /// Builds from counts already sorted non-increasingly, keeping rank
    /// alignment with any companion data.
    pub fn from_sorted_counts(counts: Vec<u64>) -> Result<Self, RankError> {
        if counts.is_empty() {
            return Err(RankError::EmptyInput);
        }
        let mut total: u128 = 0;
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 {
                return Err(RankError::NonPositiveProbability(i));
            }
            if i > 0 && c > counts[i - 1] {
                return Err(RankError::NotSorted(i));
            }
            total += c as u128;
        }
        let total = total as f64;
        let probs = counts.iter().map(|&c| c as f64 / total).collect();
        Ok(Self {
            probs,
            counts: Some(counts),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    /// Support size n.
    pub fn support(&self) -> usize {
        self.probs.len()
    }

    /// Checks p(i) <= 1/i for every rank. Holds for any correctly sorted,
    /// normalized distribution; exposed as a consistency assertion.
    pub fn validate_rank_bound(&self) -> bool {
        self.probs
            .iter()
            .enumerate()
            .all(|(k, &p)| p <= 1.0 / (k + 1) as f64 + NORMALIZATION_TOLERANCE)
    }

    /// Draws a multinomial sample of `total` observations, returning one
    /// count per rank (zeros possible). Sequential binomial thinning, so the
    /// cost is linear in the support, not in `total`.
    pub fn sample_counts<R: Rng + ?Sized>(&self, total: u64, rng: &mut R) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.probs.len());
        let mut left = total;
        let mut mass_left = 1.0f64;
        for (i, &p) in self.probs.iter().enumerate() {
            if left == 0 {
                out.push(0);
                continue;
            }
            if i == self.probs.len() - 1 {
                out.push(left);
                left = 0;
                continue;
            }
            let q = (p / mass_left).clamp(0.0, 1.0);
            let draw = Binomial::new(left, q)
                .map(|b| b.sample(rng))
                .unwrap_or(0);
            out.push(draw);
            left -= draw;
            mass_left = (mass_left - p).max(f64::MIN_POSITIVE);
        }
        out
    }
}

/// Magnitudes l(1)..l(n) aligned by rank to a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthProfile {
    lengths: Vec<f64>,
}

impl LengthProfile {
    pub fn new(lengths: Vec<f64>) -> Result<Self, RankError> {
        if lengths.is_empty() {
            return Err(RankError::EmptyInput);
        }
        for (i, &l) in lengths.iter().enumerate() {
            if !l.is_finite() || l < 0.0 {
                return Err(RankError::BadLength(i));
            }
        }
        Ok(Self { lengths })
    }

    pub fn from_integers<I: IntoIterator<Item = u64>>(lengths: I) -> Result<Self, RankError> {
        Self::new(lengths.into_iter().map(|l| l as f64).collect())
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }
}

fn check_alignment(dist: &RankDistribution, profile: &LengthProfile) -> Result<(), RankError> {
    if dist.support() != profile.len() {
        return Err(RankError::DimensionMismatch {
            expected: dist.support(),
            got: profile.len(),
        });
    }
    Ok(())
}

fn check_base(base: usize) -> Result<f64, RankError> {
    if base < 2 {
        return Err(RankError::InvalidBase(base));
    }
    Ok((base as f64).ln())
}

/// Mean magnitude: sum of p(i) l(i).
pub fn mean_length(dist: &RankDistribution, profile: &LengthProfile) -> Result<f64, RankError> {
    check_alignment(dist, profile)?;
    Ok(dist
        .probs()
        .iter()
        .zip(profile.lengths())
        .map(|(p, l)| p * l)
        .sum())
}

/// Expected log-rank in base N: the soft non-singular optimum of the mean
/// code length.
pub fn mean_log_rank(dist: &RankDistribution, base: usize) -> Result<f64, RankError> {
    let ln_base = check_base(base)?;
    Ok(dist
        .probs()
        .iter()
        .enumerate()
        .skip(1) // ln 1 = 0
        .map(|(k, &p)| p * ((k + 1) as f64).ln())
        .sum::<f64>()
        / ln_base)
}

/// Entropy of the rank distribution in base-N units: the soft uniquely
/// decodable optimum of the mean code length.
pub fn entropy(dist: &RankDistribution, base: usize) -> Result<f64, RankError> {
    let ln_base = check_base(base)?;
    Ok(-dist.probs().iter().map(|&p| p * p.ln()).sum::<f64>() / ln_base)
}

/// Kendall tau-b between two equally long sequences, with tie correction:
/// (concordant - discordant) / sqrt((pairs - ties_x)(pairs - ties_y)).
///
/// O(n log n): sort by x, then count discordant pairs as merge-sort
/// inversions on y.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64, RankError> {
    if x.len() != y.len() {
        return Err(RankError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(RankError::Degenerate("need at least two observations"));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(RankError::NonFinite);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let pair_count = |run: u64| run * (run - 1) / 2;

    // Tie pair counts in x, and joint ties in (x, y).
    let mut tied_x: u64 = 0;
    let mut tied_xy: u64 = 0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && x[order[j]] == x[order[i]] {
            j += 1;
        }
        tied_x += pair_count((j - i) as u64);
        let mut k = i;
        while k < j {
            let mut m = k;
            while m < j && y[order[m]] == y[order[k]] {
                m += 1;
            }
            tied_xy += pair_count((m - k) as u64);
            k = m;
        }
        i = j;
    }

    // Tie pair counts in y.
    let mut ys: Vec<f64> = y.to_vec();
    ys.sort_by(f64::total_cmp);
    let mut tied_y: u64 = 0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && ys[j] == ys[i] {
            j += 1;
        }
        tied_y += pair_count((j - i) as u64);
        i = j;
    }

    // Discordant pairs: inversions of y in x-order (ties in x were broken by
    // ascending y, which keeps same-x pairs out of the count).
    let mut seq: Vec<f64> = order.iter().map(|&k| y[k]).collect();
    let swaps = count_inversions(&mut seq);

    let total = pair_count(n as u64) as f64;
    let tied_x = tied_x as f64;
    let tied_y = tied_y as f64;
    let con_minus_dis = total - tied_x - tied_y + tied_xy as f64 - 2.0 * swaps as f64;
    let denom_x = total - tied_x;
    let denom_y = total - tied_y;
    if denom_x <= 0.0 || denom_y <= 0.0 {
        return Err(RankError::Degenerate("all values tied in one sequence"));
    }
    Ok((con_minus_dis / (denom_x * denom_y).sqrt()).clamp(-1.0, 1.0))
}

fn count_inversions(values: &mut [f64]) -> u64 {
    let n = values.len();
    let mut buf = vec![0.0f64; n];
    let mut swaps: u64 = 0;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo + width < n {
            let mid = lo + width;
            let hi = (mid + width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if values[j] < values[i] {
                    buf[k] = values[j];
                    swaps += (mid - i) as u64;
                    j += 1;
                } else {
                    buf[k] = values[i];
                    i += 1;
                }
                k += 1;
            }
            buf[k..hi].copy_from_slice(if i < mid {
                &values[i..mid]
            } else {
                &values[j..hi]
            });
            values[lo..hi].copy_from_slice(&buf[lo..hi]);
            lo = hi;
        }
        width *= 2;
    }
    swaps
}

/// Tau between probabilities and magnitudes, and whether the law of
/// abbreviation (tau < 0) holds.
pub fn law_of_abbreviation_holds(
    dist: &RankDistribution,
    profile: &LengthProfile,
) -> Result<(f64, bool), RankError> {
    check_alignment(dist, profile)?;
    let tau = kendall_tau_b(dist.probs(), profile.lengths())?;
    Ok((tau, tau < 0.0))
}

/// Coding efficiency: the scheme's minimum achievable mean length over the
/// observed mean length. Soft minima (log-rank expectation, entropy).
pub fn coding_efficiency(
    dist: &RankDistribution,
    profile: &LengthProfile,
    scheme: SchemeKind,
    base: usize,
) -> Result<f64, RankError> {
    let observed = mean_length(dist, profile)?;
    if observed <= 0.0 {
        return Err(RankError::ZeroMeanLength);
    }
    let minimum = match scheme {
        SchemeKind::NonSingular => mean_log_rank(dist, base)?,
        SchemeKind::UniquelyDecodable => entropy(dist, base)?,
    };
    Ok(minimum / observed)
}

/// Efficiency against the hard (integer-length) minima instead of the soft
/// ones, for sensitivity analysis.
pub fn coding_efficiency_hard(
    dist: &RankDistribution,
    profile: &LengthProfile,
    scheme: SchemeKind,
    base: usize,
) -> Result<f64, RankError> {
    check_base(base)?;
    let observed = mean_length(dist, profile)?;
    if observed <= 0.0 {
        return Err(RankError::ZeroMeanLength);
    }
    let minimum: f64 = match scheme {
        SchemeKind::NonSingular => dist
            .probs()
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let l = coding::nonsingular_length_hard(k as u64 + 1, base).expect("valid rank");
                p * l as f64
            })
            .sum(),
        SchemeKind::UniquelyDecodable => dist
            .probs()
            .iter()
            .map(|&p| {
                // the normalization tolerance allows p(1) to peek above 1
                let l = coding::ud_length_hard(p.min(1.0), base).expect("valid probability");
                p * l as f64
            })
            .sum(),
    };
    Ok(minimum / observed)
}

/// Both efficiencies on one profile. eta_ud >= eta_ns always, because the
/// entropy dominates the expected log-rank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyPair {
    pub eta_ns: f64,
    pub eta_ud: f64,
    pub mean_length: f64,
}

pub fn efficiency_pair(
    dist: &RankDistribution,
    profile: &LengthProfile,
    base: usize,
) -> Result<EfficiencyPair, RankError> {
    let observed = mean_length(dist, profile)?;
    if observed <= 0.0 {
        return Err(RankError::ZeroMeanLength);
    }
    Ok(EfficiencyPair {
        eta_ns: mean_log_rank(dist, base)? / observed,
        eta_ud: entropy(dist, base)? / observed,
        mean_length: observed,
    })
}

/// One row of the rank-table CSV interchange format.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTableRow {
    pub rank: usize,
    pub token: Option<String>,
    pub count: Option<u64>,
    pub probability: f64,
    pub length: Option<f64>,
}

/// Writes the rank table as CSV with header
/// `rank,token,count,probability,length`; probabilities carry 17 significant
/// digits. Absent optional fields are left empty.
pub fn write_rank_table<'a, W, I>(writer: W, rows: I) -> Result<(), RankError>
where
    W: io::Write,
    I: IntoIterator<Item = &'a RankTableRow>,
{
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["rank", "token", "count", "probability", "length"])
        .map_err(csv_io)?;
    for row in rows {
        out.write_record([
            row.rank.to_string(),
            row.token.clone().unwrap_or_default(),
            row.count.map(|c| c.to_string()).unwrap_or_default(),
            format!("{:.16e}", row.probability),
            row.length.map(|l| l.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_io)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the rank-table CSV format. Lines starting with `#` are treated as
/// comments.
pub fn read_rank_table<R: io::Read>(reader: R) -> Result<Vec<RankTableRow>, RankError> {
    let mut input = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = input.headers().map_err(csv_io)?.clone();
    let expected = ["rank", "token", "count", "probability", "length"];
    if headers.iter().ne(expected) {
        return Err(RankError::Parse {
            line: 1,
            reason: format!("expected header {:?}", expected.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in input.records() {
        let record = record.map_err(csv_io)?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(rows.len() + 2);
        let field = |i: usize| record.get(i).unwrap_or("");
        let rank: usize = field(0).parse().map_err(|_| RankError::Parse {
            line,
            reason: format!("bad rank {:?}", field(0)),
        })?;
        let token = match field(1) {
            "" => None,
            t => Some(t.to_string()),
        };
        let count = match field(2) {
            "" => None,
            c => Some(c.parse().map_err(|_| RankError::Parse {
                line,
                reason: format!("bad count {c:?}"),
            })?),
        };
        let probability: f64 = field(3).parse().map_err(|_| RankError::Parse {
            line,
            reason: format!("bad probability {:?}", field(3)),
        })?;
        let length = match field(4) {
            "" => None,
            l => Some(l.parse().map_err(|_| RankError::Parse {
                line,
                reason: format!("bad length {l:?}"),
            })?),
        };
        rows.push(RankTableRow {
            rank,
            token,
            count,
            probability,
            length,
        });
    }
    Ok(rows)
}

fn csv_io(err: csv::Error) -> RankError {
    RankError::Parse {
        line: 0,
        reason: err.to_string(),
    }
}
