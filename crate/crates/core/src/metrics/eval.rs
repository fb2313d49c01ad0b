use std::collections::HashSet;

use serde::Serialize;

use super::cider::cider_d;
use super::ngram::NGramIndex;
use crate::corpus::TokenizedCaption;
use crate::fense::FenseEvaluator;
use crate::report::{csv_table, rounded_json, sig6, to_json_pretty};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiversityStats {
    /// Distinct tokens over all candidates (`#Words`).
    pub n_unique_words: usize,
    /// Mean tokens per candidate (`#Sent`).
    pub mean_sentence_length: f64,
}

pub fn diversity_stats(candidates: &[TokenizedCaption]) -> Result<DiversityStats> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument(
            "diversity of an empty candidate list".into(),
        ));
    }
    let words: HashSet<&str> = candidates
        .iter()
        .flat_map(|c| c.tokens.iter().map(String::as_str))
        .collect();
    let total: usize = candidates.iter().map(TokenizedCaption::len).sum();
    Ok(DiversityStats {
        n_unique_words: words.len(),
        mean_sentence_length: total as f64 / candidates.len() as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpiderScores {
    pub per_item: Vec<f64>,
    pub mean: f64,
}

/// Per-item mean of CIDEr-D and SPICE.
pub fn spider(cider_d: &[f64], spice: &[f64]) -> Result<SpiderScores> {
    if cider_d.len() != spice.len() {
        return Err(Error::LengthMismatch {
            left: cider_d.len(),
            right: spice.len(),
        });
    }
    if cider_d.is_empty() {
        return Err(Error::InvalidArgument("SPIDEr of an empty corpus".into()));
    }
    let per_item: Vec<f64> = cider_d
        .iter()
        .zip(spice)
        .map(|(c, s)| (c + s) / 2.0)
        .collect();
    let mean = per_item.iter().sum::<f64>() / per_item.len() as f64;
    Ok(SpiderScores { per_item, mean })
}

/// One candidate with its references and, optionally, an externally computed
/// SPICE score.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalItem {
    pub id: String,
    pub candidate: TokenizedCaption,
    pub references: Vec<TokenizedCaption>,
    pub spice: Option<f64>,
}

impl EvalItem {
    pub fn new(
        id: impl Into<String>,
        candidate: TokenizedCaption,
        references: Vec<TokenizedCaption>,
    ) -> Self {
        EvalItem {
            id: id.into(),
            candidate,
            references,
            spice: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemScores {
    pub id: String,
    pub cider_d: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spice: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spider: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fense: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub empty_candidate: bool,
}

/// Corpus-level scores plus per-item detail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub cider_d: f64,
    pub spice: Option<f64>,
    pub spider: Option<f64>,
    pub fense: Option<f64>,
    pub n_unique_words: f64,
    pub mean_sentence_length: f64,
    pub items: Vec<ItemScores>,
}

impl EvalResult {
    pub const CSV_METRICS: [&'static str; 6] = [
        "cider_d",
        "spice",
        "spider",
        "fense",
        "n_words",
        "mean_sent_len",
    ];

    /// `(metric, mean)` rows in the fixed report order, omitting metrics
    /// that were not computed.
    pub fn summary(&self) -> Vec<(&'static str, f64)> {
        let values = [
            Some(self.cider_d),
            self.spice,
            self.spider,
            self.fense,
            Some(self.n_unique_words),
            Some(self.mean_sentence_length),
        ];
        Self::CSV_METRICS
            .iter()
            .zip(values)
            .filter_map(|(name, v)| v.map(|v| (*name, v)))
            .collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let rows = self
            .summary()
            .into_iter()
            .map(|(m, v)| [m.to_string(), sig6(v)]);
        csv_table(["metric", "mean"], rows)
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Corpus {
            cider_d: f64,
            #[serde(skip_serializing_if = "Option::is_none")]
            spice: Option<f64>,
            #[serde(skip_serializing_if = "Option::is_none")]
            spider: Option<f64>,
            #[serde(skip_serializing_if = "Option::is_none")]
            fense: Option<f64>,
            n_words: f64,
            mean_sent_len: f64,
        }
        #[derive(Serialize)]
        struct Report<'a> {
            corpus: Corpus,
            items: &'a [ItemScores],
        }
        let report = Report {
            corpus: Corpus {
                cider_d: self.cider_d,
                spice: self.spice,
                spider: self.spider,
                fense: self.fense,
                n_words: self.n_unique_words,
                mean_sent_len: self.mean_sentence_length,
            },
            items: &self.items,
        };
        to_json_pretty(&rounded_json(&report)?)
    }
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    values.sum::<f64>() / n as f64
}

/// Score every item. The TF-IDF index is built over the references of all
/// items. FENSE is included when an evaluator is supplied.
pub fn evaluate(items: &[EvalItem], fense: Option<&FenseEvaluator>) -> Result<EvalResult> {
    if items.is_empty() {
        return Err(Error::InvalidArgument("nothing to evaluate".into()));
    }
    let with_spice = items.iter().filter(|i| i.spice.is_some()).count();
    if with_spice != 0 && with_spice != items.len() {
        return Err(Error::InvalidArgument(format!(
            "SPICE given for {with_spice} of {} items",
            items.len()
        )));
    }
    let references: Vec<Vec<TokenizedCaption>> =
        items.iter().map(|i| i.references.clone()).collect();
    let index = NGramIndex::build_named(&references, |i| items[i].id.clone())?;

    let mut scores = Vec::with_capacity(items.len());
    for item in items {
        let cider = cider_d(&item.candidate, &item.references, &index)?;
        let fense_value = match fense {
            Some(evaluator) => Some(evaluator.score(&item.candidate, &item.references)?.fense),
            None => None,
        };
        scores.push(ItemScores {
            id: item.id.clone(),
            cider_d: cider.value,
            spice: item.spice,
            spider: item.spice.map(|s| (cider.value + s) / 2.0),
            fense: fense_value,
            empty_candidate: cider.empty_candidate,
        });
    }

    let candidates: Vec<TokenizedCaption> = items.iter().map(|i| i.candidate.clone()).collect();
    let diversity = diversity_stats(&candidates)?;
    let (spice, spider_mean) = if with_spice > 0 {
        let cider: Vec<f64> = scores.iter().map(|s| s.cider_d).collect();
        let spice: Vec<f64> = scores.iter().filter_map(|s| s.spice).collect();
        let sp = spider(&cider, &spice)?;
        (Some(mean(spice.into_iter())), Some(sp.mean))
    } else {
        (None, None)
    };
    let fense_mean = fense.map(|_| mean(scores.iter().map(|s| s.fense.unwrap_or(0.0))));

    Ok(EvalResult {
        cider_d: mean(scores.iter().map(|s| s.cider_d)),
        spice,
        spider: spider_mean,
        fense: fense_mean,
        n_unique_words: diversity.n_unique_words as f64,
        mean_sentence_length: diversity.mean_sentence_length,
        items: scores,
    })
}
