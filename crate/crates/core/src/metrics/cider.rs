//! CIDEr-D: TF-IDF weighted n-gram cosine similarity with clipped candidate
//! counts and a Gaussian length penalty.
//!
//! For each order `n` in 1..=4 and each reference `s`:
//!
//! ```text
//! sim_n(c, s) = exp(-(l_c - l_s)^2 / (2 sigma^2)) * <min(g_c, g_s), g_s> / (|g_c| |g_s|)
//! ```
//!
//! with `g` the TF-IDF vectors, `idf = ln(N / df)` and `sigma = 6`. The score
//! is `10 / |S| * sum_s mean_n sim_n(c, s)`, so it lies in `[0, 10]`.

use super::ngram::{NGramIndex, TfIdfVector, MAX_NGRAM};
use crate::corpus::TokenizedCaption;
use crate::{Error, Result};

pub const CIDER_SIGMA: f64 = 6.0;
pub const CIDER_SCALE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiderD {
    pub value: f64,
    /// The candidate had no tokens; `value` is 0.
    pub empty_candidate: bool,
}

pub fn cider_d(
    candidate: &TokenizedCaption,
    references: &[TokenizedCaption],
    index: &NGramIndex,
) -> Result<CiderD> {
    if references.is_empty() {
        return Err(Error::TooFewReferences {
            item: candidate.original.clone(),
            found: 0,
            required: 1,
        });
    }
    if candidate.is_empty() {
        return Ok(CiderD {
            value: 0.0,
            empty_candidate: true,
        });
    }

    let mut per_order = [0.0; MAX_NGRAM];
    for (slot, n) in per_order.iter_mut().zip(1..=MAX_NGRAM) {
        let cand = index.tfidf(candidate, n);
        for reference in references {
            let refv = index.tfidf(reference, n);
            *slot += clipped_cosine(&cand, &refv) * length_penalty(cand.length, refv.length);
        }
    }
    let mean_over_orders = per_order.iter().sum::<f64>() / MAX_NGRAM as f64;
    Ok(CiderD {
        value: mean_over_orders / references.len() as f64 * CIDER_SCALE,
        empty_candidate: false,
    })
}

fn clipped_cosine(cand: &TfIdfVector, reference: &TfIdfVector) -> f64 {
    let cand_sq = cand.norm_sq();
    let ref_sq = reference.norm_sq();
    if cand_sq == 0.0 || ref_sq == 0.0 {
        return 0.0;
    }
    let dot: f64 = cand
        .weights
        .iter()
        .filter_map(|(ngram, &wc)| reference.weights.get(ngram).map(|&wr| wc.min(wr) * wr))
        .sum();
    // sqrt of the product keeps identical vectors at exactly 1
    dot / (cand_sq * ref_sq).sqrt()
}

fn length_penalty(cand_len: usize, ref_len: usize) -> f64 {
    let delta = cand_len as f64 - ref_len as f64;
    (-(delta * delta) / (2.0 * CIDER_SIGMA * CIDER_SIGMA)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cap(t: &str) -> TokenizedCaption {
        TokenizedCaption::parse(t).unwrap()
    }

    fn items(sets: &[&[&str]]) -> Vec<Vec<TokenizedCaption>> {
        sets.iter()
            .map(|s| s.iter().map(|t| cap(t)).collect())
            .collect()
    }

    #[test]
    fn identical_caption_with_unit_df_scores_ten() {
        let corpus = items(&[&["a dog barks loudly outside"], &["rain falls on a roof"]]);
        let index = NGramIndex::build(&corpus).unwrap();
        let score = cider_d(&cap("a dog barks loudly outside"), &corpus[0], &index).unwrap();
        assert_eq!(score.value, 10.0);
        assert!(!score.empty_candidate);
    }

    #[test]
    fn disjoint_candidate_scores_zero() {
        let corpus = items(&[&["a dog barks"], &["rain falls"]]);
        let index = NGramIndex::build(&corpus).unwrap();
        assert_eq!(
            cider_d(&cap("wind howls"), &corpus[0], &index)
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn single_item_corpus_has_zero_idf() {
        let corpus = items(&[&["a dog barks"]]);
        let index = NGramIndex::build(&corpus).unwrap();
        assert_eq!(
            cider_d(&cap("a dog barks"), &corpus[0], &index)
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn empty_candidate_is_flagged() {
        let corpus = items(&[&["a dog barks"], &["x"]]);
        let index = NGramIndex::build(&corpus).unwrap();
        let empty = TokenizedCaption::from_tokens(Vec::<String>::new());
        let score = cider_d(&empty, &corpus[0], &index).unwrap();
        assert_eq!(score.value, 0.0);
        assert!(score.empty_candidate);
        assert!(cider_d(&cap("a"), &[], &index).is_err());
    }

    #[test]
    fn length_penalty_shape() {
        assert_eq!(length_penalty(5, 5), 1.0);
        assert!((length_penalty(0, 6) - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(length_penalty(3, 9), length_penalty(9, 3));
    }

    #[test]
    fn padding_the_candidate_lowers_the_score() {
        let corpus = items(&[&["a dog barks"], &["birds sing"], &["cars pass"]]);
        let index = NGramIndex::build(&corpus).unwrap();
        let exact = cider_d(&cap("a dog barks"), &corpus[0], &index)
            .unwrap()
            .value;
        let padded = cider_d(&cap("a dog barks x y z w"), &corpus[0], &index)
            .unwrap()
            .value;
        assert!(padded < exact);
    }

    fn word() -> impl Strategy<Value = String> {
        prop::sample::select(vec![
            "a", "dog", "barks", "the", "rain", "falls", "car", "engine",
        ])
        .prop_map(str::to_string)
    }

    fn caption() -> impl Strategy<Value = TokenizedCaption> {
        prop::collection::vec(word(), 1..8).prop_map(TokenizedCaption::from_tokens)
    }

    proptest! {
        #[test]
        fn reference_order_does_not_matter(
            cand in caption(),
            refs in prop::collection::vec(caption(), 1..5),
            others in prop::collection::vec(caption(), 1..4),
        ) {
            let mut corpus = vec![refs.clone()];
            corpus.extend(others.into_iter().map(|c| vec![c]));
            let index = NGramIndex::build(&corpus).unwrap();
            let forward = cider_d(&cand, &refs, &index).unwrap().value;
            let mut reversed = refs.clone();
            reversed.reverse();
            let backward = cider_d(&cand, &reversed, &index).unwrap().value;
            prop_assert!((forward - backward).abs() < 1e-12);
            prop_assert!((0.0..=CIDER_SCALE + 1e-12).contains(&forward));
        }

        #[test]
        fn penalty_never_grows_with_length_gap(a in 0usize..40, b in 0usize..40, extra in 0usize..10) {
            let gap = a.abs_diff(b);
            prop_assert!(length_penalty(b + gap + extra, b) <= length_penalty(a, b));
        }
    }
}
