use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Longest caption kept when preparing training data.
pub const DEFAULT_MAX_WORDS: usize = 40;

static PUNCTUATION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\p{P}").unwrap());

/// A caption split into lowercase, punctuation-free word tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenizedCaption {
    pub tokens: Vec<String>,
    pub original: String,
}

impl TokenizedCaption {
    /// Tokenize without a length limit.
    pub fn parse(raw: &str) -> Result<Self, Rejection> {
        preprocess_caption(raw, usize::MAX)
    }

    /// Build from tokens that are already clean, e.g. decoder output.
    ///
    /// `original` becomes the space-joined token string.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        let original = tokens.join(" ");
        TokenizedCaption { tokens, original }
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Why a caption was dropped during preprocessing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    Empty,
    TooLong { words: usize, max_words: usize },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Empty => f.write_str("caption is empty after cleaning"),
            Rejection::TooLong { words, max_words } => {
                write!(f, "caption has {words} words (max {max_words})")
            }
        }
    }
}

impl std::error::Error for Rejection {}

/// Lowercase, replace every Unicode punctuation character by a space and
/// split on whitespace.
pub fn preprocess_caption(raw: &str, max_words: usize) -> Result<TokenizedCaption, Rejection> {
    let lowered = raw.to_lowercase();
    let cleaned = PUNCTUATION.replace_all(&lowered, " ");
    let tokens: Vec<String> = cleaned.split_whitespace().map(str::to_string).collect();
    if tokens.is_empty() {
        return Err(Rejection::Empty);
    }
    if tokens.len() > max_words {
        return Err(Rejection::TooLong {
            words: tokens.len(),
            max_words,
        });
    }
    Ok(TokenizedCaption {
        tokens,
        original: raw.to_string(),
    })
}
