//! FENSE: sentence-embedding similarity, divided by ten when the candidate
//! has a fluency error.

mod fluency;
mod store;

use std::str::FromStr;

use serde::Serialize;

pub use fluency::{
    detect_fluency_errors, load_word_list, parse_word_list, FluencyRule, FluencyVerdict, Lexicons,
};
pub use store::{caption_key, validate_semb, SentenceEmbeddingStore, SEMB_MAGIC, SEMB_VERSION};

use crate::corpus::TokenizedCaption;
use crate::{Error, Result};

/// Penalty divisor applied on a fluency error.
pub const FLUENCY_PENALTY: f64 = 10.0;

/// How per-reference similarities are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Max,
    Mean,
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "max" => Ok(Aggregation::Max),
            "mean" => Ok(Aggregation::Mean),
            other => Err(Error::InvalidArgument(format!(
                "unknown aggregation `{other}`"
            ))),
        }
    }
}

pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "cosine of dims {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (na * nb).sqrt()).clamp(-1.0, 1.0))
}

/// Cosine similarity of the candidate against the references, aggregated.
pub fn sbert_sim(
    candidate: &[f32],
    references: &[&[f32]],
    aggregation: Aggregation,
) -> Result<f64> {
    if references.is_empty() {
        return Err(Error::InvalidArgument(
            "sbert_sim needs at least one reference".into(),
        ));
    }
    let sims = references
        .iter()
        .map(|r| cosine(candidate, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(match aggregation {
        Aggregation::Max => sims.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Aggregation::Mean => sims.iter().sum::<f64>() / sims.len() as f64,
    })
}

pub fn fense(sim: f64, verdict: &FluencyVerdict) -> f64 {
    if verdict.has_error() {
        sim / FLUENCY_PENALTY
    } else {
        sim
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FenseScore {
    pub sbert_sim: f64,
    pub verdict: FluencyVerdict,
    pub fense: f64,
}

/// An embedding store plus the lexicons needed to score captions.
#[derive(Debug, Clone)]
pub struct FenseEvaluator {
    pub store: SentenceEmbeddingStore,
    pub lexicons: Lexicons,
    pub aggregation: Aggregation,
}

impl FenseEvaluator {
    pub fn new(store: SentenceEmbeddingStore, lexicons: Lexicons) -> Self {
        FenseEvaluator {
            store,
            lexicons,
            aggregation: Aggregation::Max,
        }
    }

    pub fn with_aggregation(mut self, aggregation: Aggregation) -> Self {
        self.aggregation = aggregation;
        self
    }

    /// Embeddings are looked up by the hash of each caption's `original`
    /// string.
    pub fn score(
        &self,
        candidate: &TokenizedCaption,
        references: &[TokenizedCaption],
    ) -> Result<FenseScore> {
        let cand = self.store.require_caption(&candidate.original)?;
        let refs = references
            .iter()
            .map(|r| self.store.require_caption(&r.original))
            .collect::<Result<Vec<_>>>()?;
        let sim = sbert_sim(cand, &refs, self.aggregation)?;
        let verdict = detect_fluency_errors(candidate, &self.lexicons);
        Ok(FenseScore {
            sbert_sim: sim,
            fense: fense(sim, &verdict),
            verdict,
        })
    }
}
