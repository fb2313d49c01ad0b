//! FENSE with a SEMB store and the bundled fluency lexicons.
//!
//! Real stores come from a sentence-embedding model; here a bag-of-words
//! stand-in is enough to show the fluency penalty.

use capkit::corpus::TokenizedCaption;
use capkit::fense::{FenseEvaluator, Lexicons, SentenceEmbeddingStore};
use capkit::toymodel::bag_of_words_store;

fn main() -> capkit::Result<()> {
    let references = [
        "a man speaks while a dog barks",
        "a dog barks as a man talks",
    ];
    let candidates = [
        "a man speaks and a dog barks",
        "a man speaks while a man speaks",
        "a dog barks and",
    ];
    let store = bag_of_words_store(references.iter().chain(&candidates).copied(), 64)?;

    // The store is a plain binary file; round-trip it as a consumer would.
    let store = SentenceEmbeddingStore::from_bytes(&store.to_bytes())?;
    let evaluator = FenseEvaluator::new(store, Lexicons::builtin());
    let refs: Vec<TokenizedCaption> = references
        .iter()
        .map(|r| TokenizedCaption::parse(r).expect("non-empty"))
        .collect();
    for c in candidates {
        let score = evaluator.score(&TokenizedCaption::parse(c).expect("non-empty"), &refs)?;
        let rules: Vec<&str> = score
            .verdict
            .triggered_rules
            .iter()
            .map(|r| r.name())
            .collect();
        println!(
            "{c:<36} sim {:.3}  fense {:.3}  {:?}",
            score.sbert_sim, score.fense, rules
        );
    }
    Ok(())
}
