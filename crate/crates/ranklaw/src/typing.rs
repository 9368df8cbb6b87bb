//! Random typing: tokens produced by pressing keys at random on a keyboard
//! of N equally likely characters plus a space with probability `p_s`. The
//! space cannot be pressed twice in a row (no empty words), and the stream
//! starts as if after a space.
//!
//! A word of probability rank i has length `nonsingular_length_hard(i, N)`
//! and probability `(p_s / (1 - p_s)) ((1 - p_s) / N)^l(i)`, so the model is
//! an exactly optimal non-singular coder and a closed-form member of the
//! quasi-optimal class.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use thiserror::Error;

use crate::coding;

/// Identifier of the pseudo-random generator behind [`TokenStream`],
/// recorded in simulation metadata.
pub const GENERATOR_ID: &str = "chacha12";

const SYMBOL_POOL: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

#[derive(Debug, Error, PartialEq)]
pub enum TypingError {
    #[error("alphabet size must be at least 2, got {0}")]
    AlphabetTooSmall(usize),
    #[error("alphabet size {0} exceeds the {max} available symbols", max = SYMBOL_POOL.len())]
    AlphabetTooLarge(usize),
    #[error("space probability must lie strictly between 0 and 1, got {0}")]
    InvalidSpaceProbability(f64),
    #[error("rank must be at least 1")]
    RankOutOfRange,
}

/// Parameters of the random-typing model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomTypingParams {
    alphabet_size: usize,
    space_probability: f64,
    seed: u64,
}

impl RandomTypingParams {
    pub fn new(alphabet_size: usize, space_probability: f64, seed: u64) -> Result<Self, TypingError> {
        if alphabet_size < 2 {
            return Err(TypingError::AlphabetTooSmall(alphabet_size));
        }
        if alphabet_size > SYMBOL_POOL.len() {
            return Err(TypingError::AlphabetTooLarge(alphabet_size));
        }
        if !(space_probability > 0.0 && space_probability < 1.0) {
            return Err(TypingError::InvalidSpaceProbability(space_probability));
        }
        Ok(Self {
            alphabet_size,
            space_probability,
            seed,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn space_probability(&self) -> f64 {
        self.space_probability
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Infinite iterator over random-typing tokens. Deterministic for a given
/// seed; generation is sequential per stream.
pub struct TokenStream {
    rng: ChaCha12Rng,
    alphabet_size: usize,
    space_probability: f64,
}

impl TokenStream {
    pub fn new(params: &RandomTypingParams) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(params.seed),
            alphabet_size: params.alphabet_size,
            space_probability: params.space_probability,
        }
    }
}

impl Iterator for TokenStream {
    type Item = String;

    fn next(&mut self) -> Option<String> {
        let mut token = String::new();
        loop {
            // The space key is disabled right after a space (and at stream
            // start), so the first keystroke of a token is always a character.
            if !token.is_empty() && self.rng.random::<f64>() < self.space_probability {
                return Some(token);
            }
            let k = self.rng.random_range(0..self.alphabet_size);
            token.push(SYMBOL_POOL[k] as char);
        }
    }
}

/// The first `count` tokens of the stream seeded by `params`.
pub fn generate_tokens(params: &RandomTypingParams, count: usize) -> Vec<String> {
    TokenStream::new(params).take(count).collect()
}

/// Probability that random typing produces the word of probability rank
/// `rank`: `(p_s / (1 - p_s)) ((1 - p_s) / N)^l(rank)` with the hard
/// non-singular optimal length.
pub fn theoretical_rank_probability(
    params: &RandomTypingParams,
    rank: u64,
) -> Result<f64, TypingError> {
    let length = coding::nonsingular_length_hard(rank, params.alphabet_size)
        .map_err(|_| TypingError::RankOutOfRange)?;
    let ps = params.space_probability;
    let per_symbol = (1.0 - ps) / params.alphabet_size as f64;
    Ok(ps / (1.0 - ps) * per_symbol.powi(length as i32))
}

/// The Zipf parameters random typing realizes:
/// `alpha = -log_N((1 - p_s) / N)` (always above 1) and
/// `c = p_s / (1 - p_s)`.
pub fn theoretical_zipf_parameters(params: &RandomTypingParams) -> (f64, f64) {
    let ps = params.space_probability;
    let n = params.alphabet_size as f64;
    let alpha = -(((1.0 - ps) / n).ln() / n.ln());
    let c = ps / (1.0 - ps);
    (alpha, c)
}

/// Closed-form size-probability law of random typing, in raw form
/// `l(i) = a_rt log_N p(i) + b_rt` and in class form with `a_ud = -a_rt`,
/// `b_ud = b_rt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbbreviationParams {
    pub a_rt: f64,
    pub b_rt: f64,
    pub a_ud: f64,
    pub b_ud: f64,
}

pub fn theoretical_abbreviation_parameters(params: &RandomTypingParams) -> AbbreviationParams {
    let ps = params.space_probability;
    let ln_n = (params.alphabet_size as f64).ln();
    let a_rt = 1.0 / ((1.0 - ps).ln() / ln_n - 1.0);
    let b_rt = a_rt * (((1.0 - ps) / ps).ln() / ln_n);
    AbbreviationParams {
        a_rt,
        b_rt,
        a_ud: -a_rt,
        b_ud: b_rt,
    }
}

/// Everything needed to reproduce a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationMetadata {
    pub alphabet_size: usize,
    pub space_probability: f64,
    pub seed: u64,
    pub count: usize,
    pub generator: &'static str,
}

impl SimulationMetadata {
    pub fn new(params: &RandomTypingParams, count: usize) -> Self {
        Self {
            alphabet_size: params.alphabet_size(),
            space_probability: params.space_probability(),
            seed: params.seed(),
            count,
            generator: GENERATOR_ID,
        }
    }
}
