use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::corpus::TokenizedCaption;
use crate::{Error, Result};

/// Highest n-gram order used by CIDEr-D.
pub const MAX_NGRAM: usize = 4;

pub type NGram = Vec<String>;

/// Term counts of all n-grams of order `n`.
pub fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<NGram, usize> {
    let mut counts = BTreeMap::new();
    if n == 0 {
        return counts;
    }
    for window in tokens.windows(n) {
        *counts.entry(window.to_vec()).or_insert(0) += 1;
    }
    counts
}

/// Document frequencies of n-grams (orders 1 to 4) over a reference corpus.
///
/// A "document" is one evaluated item: an n-gram occurring in any of the
/// item's reference captions counts once for that item.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramIndex {
    df: [HashMap<NGram, usize>; MAX_NGRAM],
    corpus_size: usize,
}

/// Sparse TF-IDF weights of one caption for one n-gram order. Keys are kept
/// sorted so that sums are reduced in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfVector {
    pub n: usize,
    pub weights: BTreeMap<NGram, f64>,
    /// Token count of the caption.
    pub length: usize,
}

impl TfIdfVector {
    pub fn norm_sq(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum()
    }
}

impl NGramIndex {
    pub fn build(reference_sets: &[Vec<TokenizedCaption>]) -> Result<Self> {
        Self::build_named(reference_sets, |i| i.to_string())
    }

    /// Like [`NGramIndex::build`], naming items through `name` in errors.
    pub fn build_named(
        reference_sets: &[Vec<TokenizedCaption>],
        name: impl Fn(usize) -> String,
    ) -> Result<Self> {
        if reference_sets.is_empty() {
            return Err(Error::InvalidArgument(
                "cannot index an empty corpus".into(),
            ));
        }
        let mut df: [HashMap<NGram, usize>; MAX_NGRAM] = Default::default();
        for (i, refs) in reference_sets.iter().enumerate() {
            if refs.is_empty() {
                return Err(Error::TooFewReferences {
                    item: name(i),
                    found: 0,
                    required: 1,
                });
            }
            for (order, table) in df.iter_mut().enumerate() {
                let present: BTreeSet<NGram> = refs
                    .iter()
                    .flat_map(|r| ngram_counts(&r.tokens, order + 1).into_keys())
                    .collect();
                for ngram in present {
                    *table.entry(ngram).or_insert(0) += 1;
                }
            }
        }
        Ok(NGramIndex {
            df,
            corpus_size: reference_sets.len(),
        })
    }

    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    /// Document frequency; 0 for n-grams never seen in the references.
    pub fn df(&self, ngram: &[String]) -> usize {
        match ngram.len() {
            n @ 1..=MAX_NGRAM => self.df[n - 1].get(ngram).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// `ln(N / df)`, with unseen n-grams treated as `df = 1`.
    pub fn idf(&self, ngram: &[String]) -> f64 {
        let df = self.df(ngram).max(1);
        (self.corpus_size as f64 / df as f64).ln()
    }

    pub fn tfidf(&self, caption: &TokenizedCaption, n: usize) -> TfIdfVector {
        let weights = ngram_counts(&caption.tokens, n)
            .into_iter()
            .map(|(ngram, tf)| {
                let w = tf as f64 * self.idf(&ngram);
                (ngram, w)
            })
            .collect();
        TfIdfVector {
            n,
            weights,
            length: caption.len(),
        }
    }

    pub fn len(&self, n: usize) -> usize {
        self.df.get(n.wrapping_sub(1)).map_or(0, HashMap::len)
    }

    pub fn is_empty(&self) -> bool {
        self.df.iter().all(HashMap::is_empty)
    }
}
