//! Constrained beam search over any next-token scorer.
//!
//! Constraints applied at every step:
//!
//! - `<eos>` is forbidden until `min_len` tokens have been generated;
//! - a token already in the hypothesis is forbidden unless it is a stop-word;
//! - after `max_len` tokens only `<eos>` is allowed;
//! - `<pad>`, `<bos>` and task tokens are never generated.

mod beam;
mod te;
mod vocab;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use beam::{
    beam_search, greedy_decode, is_allowed, BeamHypothesis, DecodeConfig, Decoded, Scorer,
};
pub use te::{te_compare, TeComparison, TePair, TeSide};
pub use vocab::{Vocabulary, BOS_TOKEN, EOS_TOKEN, PAD_TOKEN};

use crate::fense::{load_word_list, Lexicons};
use crate::Result;

/// The bundled English stop-word list.
pub fn default_stopwords() -> HashSet<String> {
    Lexicons::builtin().stopwords
}

/// Stop-word file: one token per line, `#` comments.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    load_word_list(path)
}

/// One line of `decode` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeRecord {
    pub id: String,
    pub task: String,
    pub caption: String,
    pub logprob: f64,
}
