//! Rule-based fluency error detection.
//!
//! Rules, checked on the tokenized caption:
//!
//! - `repeated_ngram`: a 4-gram occurring twice, a bigram containing a
//!   non-stop-word occurring twice, or a non-stop-word immediately repeated.
//! - `incomplete_sentence`: the caption ends on a word of the
//!   incomplete-endings list (`and`, `the`, `with`, ...), or is empty.
//! - `repeated_adverb`: an adverb appears twice.
//! - `missing_conjunction`: two finite verbs with no conjunction between them.
//! - `missing_verb`: no word of the verb list appears.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::corpus::TokenizedCaption;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FluencyRule {
    RepeatedNgram,
    IncompleteSentence,
    RepeatedAdverb,
    MissingConjunction,
    MissingVerb,
}

impl FluencyRule {
    pub fn name(self) -> &'static str {
        match self {
            FluencyRule::RepeatedNgram => "repeated_ngram",
            FluencyRule::IncompleteSentence => "incomplete_sentence",
            FluencyRule::RepeatedAdverb => "repeated_adverb",
            FluencyRule::MissingConjunction => "missing_conjunction",
            FluencyRule::MissingVerb => "missing_verb",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FluencyVerdict {
    pub triggered_rules: BTreeSet<FluencyRule>,
}

impl FluencyVerdict {
    pub fn has_error(&self) -> bool {
        !self.triggered_rules.is_empty()
    }
}

/// Word lists consulted by the fluency rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicons {
    pub verbs: HashSet<String>,
    pub finite_verbs: HashSet<String>,
    pub adverbs: HashSet<String>,
    pub conjunctions: HashSet<String>,
    pub incomplete_endings: HashSet<String>,
    pub stopwords: HashSet<String>,
}

const BUILTIN: [(&str, &str); 6] = [
    ("verbs.txt", include_str!("../../lexicons/verbs.txt")),
    (
        "finite_verbs.txt",
        include_str!("../../lexicons/finite_verbs.txt"),
    ),
    ("adverbs.txt", include_str!("../../lexicons/adverbs.txt")),
    (
        "conjunctions.txt",
        include_str!("../../lexicons/conjunctions.txt"),
    ),
    (
        "incomplete_endings.txt",
        include_str!("../../lexicons/incomplete_endings.txt"),
    ),
    (
        "stopwords.txt",
        include_str!("../../lexicons/stopwords.txt"),
    ),
];

/// Parse a word list: one word per line, `#` starts a comment.
pub fn parse_word_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(|line| line.split('#').next().unwrap_or_default().trim())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn load_word_list(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_word_list(&text))
}

impl Default for Lexicons {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Lexicons {
    pub fn builtin() -> Self {
        let lists: HashMap<&str, HashSet<String>> = BUILTIN
            .iter()
            .map(|(name, text)| (*name, parse_word_list(text)))
            .collect();
        Self::from_lists(lists)
    }

    /// Built-in lists, with any of `verbs.txt`, `finite_verbs.txt`,
    /// `adverbs.txt`, `conjunctions.txt`, `incomplete_endings.txt` and
    /// `stopwords.txt` found in `dir` taking precedence.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(Error::InvalidArgument(format!(
                "lexicon directory {} does not exist",
                dir.display()
            )));
        }
        let mut lists = HashMap::new();
        for (name, text) in BUILTIN {
            let path = dir.join(name);
            let words = if path.exists() {
                load_word_list(&path)?
            } else {
                parse_word_list(text)
            };
            lists.insert(name, words);
        }
        Ok(Self::from_lists(lists))
    }

    fn from_lists(mut lists: HashMap<&str, HashSet<String>>) -> Self {
        let mut take = |name| lists.remove(name).unwrap_or_default();
        Lexicons {
            verbs: take("verbs.txt"),
            finite_verbs: take("finite_verbs.txt"),
            adverbs: take("adverbs.txt"),
            conjunctions: take("conjunctions.txt"),
            incomplete_endings: take("incomplete_endings.txt"),
            stopwords: take("stopwords.txt"),
        }
    }
}

pub fn detect_fluency_errors(caption: &TokenizedCaption, lexicons: &Lexicons) -> FluencyVerdict {
    let tokens = &caption.tokens;
    let mut triggered = BTreeSet::new();

    if has_repetition(tokens, &lexicons.stopwords) {
        triggered.insert(FluencyRule::RepeatedNgram);
    }
    match tokens.last() {
        Some(last) if !lexicons.incomplete_endings.contains(last) => {}
        _ => {
            triggered.insert(FluencyRule::IncompleteSentence);
        }
    }
    let mut adverbs_seen = HashSet::new();
    if tokens
        .iter()
        .filter(|t| lexicons.adverbs.contains(*t))
        .any(|t| !adverbs_seen.insert(t))
    {
        triggered.insert(FluencyRule::RepeatedAdverb);
    }
    if missing_conjunction(tokens, lexicons) {
        triggered.insert(FluencyRule::MissingConjunction);
    }
    if !tokens.iter().any(|t| lexicons.verbs.contains(t)) {
        triggered.insert(FluencyRule::MissingVerb);
    }

    FluencyVerdict {
        triggered_rules: triggered,
    }
}

fn has_repetition(tokens: &[String], stopwords: &HashSet<String>) -> bool {
    let content = |t: &String| !stopwords.contains(t);
    if tokens.windows(2).any(|w| w[0] == w[1] && content(&w[0])) {
        return true;
    }
    let mut bigrams = HashSet::new();
    for w in tokens.windows(2) {
        if (content(&w[0]) || content(&w[1])) && !bigrams.insert(w) {
            return true;
        }
    }
    let mut fourgrams = HashSet::new();
    tokens.windows(4).any(|w| !fourgrams.insert(w))
}

fn missing_conjunction(tokens: &[String], lexicons: &Lexicons) -> bool {
    let mut open_clause = false;
    for token in tokens {
        if lexicons.conjunctions.contains(token) {
            open_clause = false;
        } else if lexicons.finite_verbs.contains(token) {
            if open_clause {
                return true;
            }
            open_clause = true;
        }
    }
    false
}
