//! Decoding the same inputs under two task embeddings.

use serde::Serialize;

use super::{beam_search, DecodeConfig, Scorer, Vocabulary};
use crate::corpus::{DatasetTag, TokenizedCaption};
use crate::metrics::{diversity_stats, evaluate, DiversityStats, EvalItem};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TePair {
    pub id: String,
    pub caption_a: String,
    pub logprob_a: f64,
    pub caption_b: String,
    pub logprob_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeSide {
    pub task: String,
    pub stats: DiversityStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeComparison {
    pub pairs: Vec<TePair>,
    pub a: TeSide,
    pub b: TeSide,
}

impl TeComparison {
    pub fn captions_a(&self) -> Vec<TokenizedCaption> {
        self.pairs
            .iter()
            .map(|p| TokenizedCaption::from_tokens(p.caption_a.split_whitespace()))
            .collect()
    }

    pub fn captions_b(&self) -> Vec<TokenizedCaption> {
        self.pairs
            .iter()
            .map(|p| TokenizedCaption::from_tokens(p.caption_b.split_whitespace()))
            .collect()
    }

    /// Corpus CIDEr-D of the task-A outputs using each task-B output as the
    /// single reference. High values mean both tasks describe the same
    /// content.
    pub fn cross_cider_d(&self) -> Result<f64> {
        let items: Vec<EvalItem> = self
            .captions_a()
            .into_iter()
            .zip(self.captions_b())
            .zip(&self.pairs)
            .map(|((a, b), pair)| EvalItem::new(pair.id.clone(), a, vec![b]))
            .collect();
        Ok(evaluate(&items, None)?.cider_d)
    }
}

/// Decode every context once with `task_a` and once with `task_b`.
pub fn te_compare<S: Scorer>(
    scorer: &S,
    ids: &[String],
    contexts: &[&S::Context],
    vocab: &Vocabulary,
    cfg: &DecodeConfig,
    task_a: &DatasetTag,
    task_b: &DatasetTag,
) -> Result<TeComparison> {
    if ids.len() != contexts.len() {
        return Err(Error::LengthMismatch {
            left: ids.len(),
            right: contexts.len(),
        });
    }
    vocab.task_id(task_a)?;
    vocab.task_id(task_b)?;
    let run = |task: &DatasetTag| {
        let cfg = DecodeConfig {
            task: Some(task.clone()),
            ..cfg.clone()
        };
        beam_search(scorer, contexts, vocab, &cfg)
    };
    let out_a = run(task_a)?;
    let out_b = run(task_b)?;

    let mut pairs = Vec::with_capacity(ids.len());
    for ((id, a), b) in ids.iter().zip(&out_a).zip(&out_b) {
        pairs.push(TePair {
            id: id.clone(),
            caption_a: vocab.decode(&a.token_ids)?.join(" "),
            logprob_a: a.logprob,
            caption_b: vocab.decode(&b.token_ids)?.join(" "),
            logprob_b: b.logprob,
        });
    }
    let mut comparison = TeComparison {
        pairs,
        a: TeSide {
            task: task_a.name().to_string(),
            stats: DiversityStats {
                n_unique_words: 0,
                mean_sentence_length: 0.0,
            },
        },
        b: TeSide {
            task: task_b.name().to_string(),
            stats: DiversityStats {
                n_unique_words: 0,
                mean_sentence_length: 0.0,
            },
        },
    };
    if !comparison.pairs.is_empty() {
        comparison.a.stats = diversity_stats(&comparison.captions_a())?;
        comparison.b.stats = diversity_stats(&comparison.captions_b())?;
    }
    Ok(comparison)
}
