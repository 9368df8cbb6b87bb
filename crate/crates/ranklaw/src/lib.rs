//! Rank-frequency statistics and optimal coding.
//!
//! The crate connects three views of a communication system that produces
//! ranked units with probabilities `p(i)` and magnitudes `l(i)`:
//!
//! * [`coding`] — code tables over finite alphabets, the optimal code-length
//!   formulas for non-singular and uniquely decodable coding, Elias gamma
//!   codes, and decodability checks;
//! * [`rank`] — rank distributions and their scalar statistics (mean length,
//!   expected log-rank, entropy, Kendall tau-b, coding efficiencies);
//! * [`fit`] — Zipf and exponential rank-distribution fits, the size-rank and
//!   size-probability laws, membership testing for the class of systems that
//!   sit a linear displacement away from both coding optima, and the
//!   conversions that tie the three laws together;
//! * [`typing`] — a seeded random-typing generator with its closed-form rank
//!   probabilities, used as a reference member of that class;
//! * [`corpus`] — streaming tokenization and token/count/length tables that
//!   feed the statistics above.

pub mod coding;
pub mod corpus;
pub mod fit;
pub mod rank;
pub mod typing;

pub use coding::{Alphabet, CodeTable, CodingError, SchemeKind};
pub use corpus::{CorpusError, LengthUnit, Splitter, TokenTable, TokenizerOptions};
pub use fit::{
    ClassMembershipReport, ClassThresholds, ExponentialFit, FitError, GroupParams, LawKind,
    LinearLawFit, LogLogDiagnostic, ModelVerdict, ZipfFit,
};
pub use rank::{EfficiencyPair, LengthProfile, RankDistribution, RankError};
pub use typing::{RandomTypingParams, TypingError};
