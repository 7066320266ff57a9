//! Symbol bigram language model and Viterbi word decoding.

mod bigram;
mod viterbi;

use thiserror::Error;

use crate::script::LabelId;

pub use bigram::{is_standalone, split_standalone, train_bigram, BigramModel, CorpusStats, Token};
pub use viterbi::{path_score, viterbi_decode, Candidate, CandidateLattice};

/// Default number of classifier candidates kept per symbol.
pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("corpus contains no usable words")]
    EmptyCorpus,
    #[error("label {0} is not in the model vocabulary")]
    UnknownLabel(LabelId),
    #[error("lattice position {0} has no candidates")]
    EmptyPosition(usize),
    #[error("corrupt bigram model: {0}")]
    CorruptModel(String),
    #[error("bigram model version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
