use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::corpus::DatasetTag;
use crate::decode::Vocabulary;
use crate::{Error, Result};

/// Anything that produces a next-token log-probability vector.
///
/// The vector must have one entry per vocabulary id. Entries may be `-inf`
/// but never NaN or `+inf`.
pub trait Scorer {
    type Context: ?Sized;

    fn vocab_size(&self) -> usize;

    fn next_logprobs(&self, context: &Self::Context, prefix: &[usize]) -> Result<Vec<f64>>;

    /// Score several `(context, prefix)` pairs. Override to share work
    /// across a batch; results must match the one-at-a-time calls.
    fn next_logprobs_batch(
        &self,
        requests: &[(&Self::Context, &[usize])],
    ) -> Result<Vec<Vec<f64>>> {
        requests
            .iter()
            .map(|(ctx, prefix)| self.next_logprobs(ctx, prefix))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeConfig {
    pub beam_size: usize,
    /// Minimum number of content tokens before `<eos>` is allowed.
    pub min_len: usize,
    /// Maximum number of content tokens; `<eos>` is not counted.
    pub max_len: usize,
    /// Token ids that may repeat within one output.
    pub stop_words: BTreeSet<usize>,
    /// Task embedding used in place of `<bos>`.
    pub task: Option<DatasetTag>,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            beam_size: 2,
            min_len: 3,
            max_len: 30,
            stop_words: BTreeSet::new(),
            task: None,
        }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beam_size == 0 {
            return Err(Error::InvalidArgument(
                "beam_size must be at least 1".into(),
            ));
        }
        if self.max_len == 0 || self.min_len > self.max_len {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= max_len and min_len <= max_len, got min_len {} max_len {}",
                self.min_len, self.max_len
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamHypothesis {
    /// Start id followed by generated ids; ends with `<eos>` once finished.
    pub token_ids: Vec<usize>,
    pub cum_logprob: f64,
    pub finished: bool,
}

impl BeamHypothesis {
    fn content(&self) -> &[usize] {
        let end = if self.finished {
            self.token_ids.len() - 1
        } else {
            self.token_ids.len()
        };
        &self.token_ids[1..end]
    }

    /// Ranking score: log-probability per generated token, `<eos>` included.
    pub fn normalized_score(&self) -> f64 {
        self.cum_logprob / (self.token_ids.len() - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    /// Generated ids without start and `<eos>`.
    pub token_ids: Vec<usize>,
    pub logprob: f64,
    pub score: f64,
}

/// Higher score first, then the lexicographically smaller sequence.
fn rank(a_score: f64, a_ids: &[usize], b_score: f64, b_ids: &[usize]) -> Ordering {
    b_score.total_cmp(&a_score).then_with(|| a_ids.cmp(b_ids))
}

/// Whether `token` may follow `hyp`'s content under the decoding constraints.
pub fn is_allowed(token: usize, content: &[usize], vocab: &Vocabulary, cfg: &DecodeConfig) -> bool {
    let eos = vocab.eos_id();
    if token == eos {
        return content.len() >= cfg.min_len;
    }
    if content.len() >= cfg.max_len || vocab.is_special(token) {
        return false;
    }
    cfg.stop_words.contains(&token) || !content.contains(&token)
}

fn check_scores(scores: &[f64], vocab_size: usize) -> Result<()> {
    if scores.len() != vocab_size {
        return Err(Error::Shape(format!(
            "scorer returned {} log-probs for a vocabulary of {vocab_size}",
            scores.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan() || *s == f64::INFINITY) {
        return Err(Error::NonFinite("scorer output".into()));
    }
    Ok(())
}

/// Per-batch beam search.
///
/// Each step expands every active hypothesis of every item with one scorer
/// call, keeps the `beam_size` best candidates per item by cumulative
/// log-probability (ties: lexicographically smaller sequence), and moves the
/// ones ending in `<eos>` to a frozen finished pool. The result per item is
/// the finished hypothesis with the best length-normalized score.
pub fn beam_search<S: Scorer>(
    scorer: &S,
    contexts: &[&S::Context],
    vocab: &Vocabulary,
    cfg: &DecodeConfig,
) -> Result<Vec<Decoded>> {
    cfg.validate()?;
    if scorer.vocab_size() != vocab.len() {
        return Err(Error::Shape(format!(
            "scorer vocabulary {} differs from decoder vocabulary {}",
            scorer.vocab_size(),
            vocab.len()
        )));
    }
    let start = vocab.start_id(cfg.task.as_ref())?;
    let eos = vocab.eos_id();

    let mut active: Vec<Vec<BeamHypothesis>> = contexts
        .iter()
        .map(|_| {
            vec![BeamHypothesis {
                token_ids: vec![start],
                cum_logprob: 0.0,
                finished: false,
            }]
        })
        .collect();
    let mut finished: Vec<Vec<BeamHypothesis>> = vec![Vec::new(); contexts.len()];

    let mut step = 0;
    while active.iter().any(|a| !a.is_empty()) {
        let requests: Vec<(&S::Context, &[usize])> = active
            .iter()
            .enumerate()
            .flat_map(|(item, hyps)| {
                hyps.iter()
                    .map(move |h| (contexts[item], h.token_ids.as_slice()))
            })
            .collect();
        let scores = scorer.next_logprobs_batch(&requests)?;
        if scores.len() != requests.len() {
            return Err(Error::LengthMismatch {
                left: scores.len(),
                right: requests.len(),
            });
        }
        let mut scores = scores.into_iter();

        for item in 0..contexts.len() {
            if active[item].is_empty() {
                continue;
            }
            let mut candidates: Vec<BeamHypothesis> = Vec::new();
            for hyp in &active[item] {
                let logprobs = scores.next().expect("one score vector per request");
                check_scores(&logprobs, vocab.len())?;
                let content = hyp.content();
                for (token, &lp) in logprobs.iter().enumerate() {
                    if lp == f64::NEG_INFINITY || !is_allowed(token, content, vocab, cfg) {
                        continue;
                    }
                    let mut token_ids = hyp.token_ids.clone();
                    token_ids.push(token);
                    candidates.push(BeamHypothesis {
                        token_ids,
                        cum_logprob: hyp.cum_logprob + lp,
                        finished: token == eos,
                    });
                }
            }
            if candidates.is_empty() && finished[item].is_empty() {
                return Err(Error::AllTokensForbidden { item, step });
            }
            candidates
                .sort_by(|a, b| rank(a.cum_logprob, &a.token_ids, b.cum_logprob, &b.token_ids));
            candidates.truncate(cfg.beam_size);
            let (done, open): (Vec<_>, Vec<_>) = candidates.into_iter().partition(|h| h.finished);
            finished[item].extend(done);
            active[item] = open;
        }
        step += 1;
    }

    finished
        .into_iter()
        .enumerate()
        .map(|(item, hyps)| {
            let best = hyps
                .iter()
                .min_by(|a, b| {
                    rank(
                        a.normalized_score(),
                        &a.token_ids,
                        b.normalized_score(),
                        &b.token_ids,
                    )
                })
                .ok_or(Error::AllTokensForbidden { item, step })?;
            Ok(Decoded {
                token_ids: best.content().to_vec(),
                logprob: best.cum_logprob,
                score: best.normalized_score(),
            })
        })
        .collect()
}

/// Beam search with a beam of one.
pub fn greedy_decode<S: Scorer>(
    scorer: &S,
    context: &S::Context,
    vocab: &Vocabulary,
    cfg: &DecodeConfig,
) -> Result<Decoded> {
    let cfg = DecodeConfig {
        beam_size: 1,
        ..cfg.clone()
    };
    let mut out = beam_search(scorer, &[context], vocab, &cfg)?;
    Ok(out.remove(0))
}
