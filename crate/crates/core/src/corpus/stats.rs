use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use super::{ClipRecord, Stemmer, TokenizedCaption};
use crate::{Error, Result};

/// Dataset summary with the rows of a typical captioning-dataset table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub n_audio: usize,
    pub total_hours: f64,
    pub duration_min: f64,
    pub duration_max: f64,
    pub n_captions: usize,
    /// Captions that were empty once punctuation was removed.
    pub n_rejected: usize,
    pub vocab_size: usize,
    pub n_words: usize,
    pub caption_len_min: usize,
    pub caption_len_max: usize,
    pub caption_len_mean: f64,
    pub captions_per_audio_min: usize,
    pub captions_per_audio_max: usize,
}

impl CorpusStats {
    pub const CSV_HEADER: [&'static str; 13] = [
        "n_audio",
        "total_hours",
        "duration_min",
        "duration_max",
        "n_captions",
        "n_rejected",
        "vocab_size",
        "n_words",
        "caption_len_min",
        "caption_len_max",
        "caption_len_mean",
        "captions_per_audio_min",
        "captions_per_audio_max",
    ];

    pub fn csv_values(&self) -> Vec<String> {
        use crate::report::sig6;
        vec![
            self.n_audio.to_string(),
            sig6(self.total_hours),
            sig6(self.duration_min),
            sig6(self.duration_max),
            self.n_captions.to_string(),
            self.n_rejected.to_string(),
            self.vocab_size.to_string(),
            self.n_words.to_string(),
            self.caption_len_min.to_string(),
            self.caption_len_max.to_string(),
            sig6(self.caption_len_mean),
            self.captions_per_audio_min.to_string(),
            self.captions_per_audio_max.to_string(),
        ]
    }
}

pub fn corpus_stats(records: &[ClipRecord]) -> CorpusStats {
    let mut vocab: HashSet<&str> = HashSet::new();
    let mut tokenized = Vec::new();
    let mut n_rejected = 0;
    for record in records {
        for raw in &record.captions {
            match TokenizedCaption::parse(raw) {
                Ok(cap) => tokenized.push(cap),
                Err(_) => n_rejected += 1,
            }
        }
    }
    for cap in &tokenized {
        vocab.extend(cap.tokens.iter().map(String::as_str));
    }
    let lengths: Vec<usize> = tokenized.iter().map(TokenizedCaption::len).collect();
    let n_words: usize = lengths.iter().sum();
    let per_audio = records.iter().map(|r| r.captions.len());
    let durations = records.iter().map(|r| r.duration_sec);

    CorpusStats {
        n_audio: records.len(),
        total_hours: records.iter().map(|r| r.duration_sec).sum::<f64>() / 3600.0,
        duration_min: durations.clone().reduce(f64::min).unwrap_or(0.0),
        duration_max: durations.reduce(f64::max).unwrap_or(0.0),
        n_captions: tokenized.len() + n_rejected,
        n_rejected,
        vocab_size: vocab.len(),
        n_words,
        caption_len_min: lengths.iter().copied().min().unwrap_or(0),
        caption_len_max: lengths.iter().copied().max().unwrap_or(0),
        caption_len_mean: if lengths.is_empty() {
            0.0
        } else {
            n_words as f64 / lengths.len() as f64
        },
        captions_per_audio_min: per_audio.clone().min().unwrap_or(0),
        captions_per_audio_max: per_audio.max().unwrap_or(0),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NGramCount {
    pub ngram: String,
    pub count: usize,
}

/// Count n-grams of (optionally stemmed) tokens, most frequent first, ties in
/// lexicographic order. `top_k = None` keeps everything.
pub fn ngram_distribution(
    captions: &[TokenizedCaption],
    n: usize,
    top_k: Option<usize>,
    stemmer: Stemmer,
) -> Result<Vec<NGramCount>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "n-gram order must be at least 1".into(),
        ));
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for cap in captions {
        let stems: Vec<String> = cap.tokens.iter().map(|t| stemmer.stem(t)).collect();
        for window in stems.windows(n) {
            *counts.entry(window.join(" ")).or_default() += 1;
        }
    }
    let mut ranked: Vec<NGramCount> = counts
        .into_iter()
        .map(|(ngram, count)| NGramCount { ngram, count })
        .collect();
    // stable sort keeps the BTreeMap's lexicographic order among equal counts
    ranked.sort_by_key(|c| std::cmp::Reverse(c.count));
    if let Some(k) = top_k {
        ranked.truncate(k);
    }
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DatasetTag;

    fn caps(texts: &[&str]) -> Vec<TokenizedCaption> {
        texts
            .iter()
            .map(|t| TokenizedCaption::parse(t).unwrap())
            .collect()
    }

    fn pairs(dist: &[NGramCount]) -> Vec<(&str, usize)> {
        dist.iter().map(|c| (c.ngram.as_str(), c.count)).collect()
    }

    #[test]
    fn single_caption_stats() {
        let records = vec![ClipRecord::new("x", DatasetTag::Ac, "train")
            .with_duration(7200.0)
            .with_captions(["a b a"])];
        let stats = corpus_stats(&records);
        assert_eq!(stats.vocab_size, 2);
        assert_eq!(stats.n_words, 3);
        assert_eq!(stats.caption_len_mean, 3.0);
        assert_eq!(stats.total_hours, 2.0);
        assert_eq!(stats.n_audio, 1);
    }

    #[test]
    fn length_range_and_mean() {
        let records = vec![
            ClipRecord::new("x", DatasetTag::Cl, "train")
                .with_duration(20.0)
                .with_captions(["one two three four"]),
            ClipRecord::new("y", DatasetTag::Cl, "train")
                .with_duration(25.0)
                .with_captions(["one two three four five six", "!!!"]),
        ];
        let stats = corpus_stats(&records);
        assert_eq!(stats.caption_len_mean, 5.0);
        assert_eq!((stats.caption_len_min, stats.caption_len_max), (4, 6));
        assert_eq!(
            (stats.captions_per_audio_min, stats.captions_per_audio_max),
            (1, 2)
        );
        assert_eq!(stats.n_rejected, 1);
        assert_eq!((stats.duration_min, stats.duration_max), (20.0, 25.0));
    }

    #[test]
    fn unigram_counts() {
        let dist = ngram_distribution(&caps(&["a b a"]), 1, None, Stemmer::Porter).unwrap();
        assert_eq!(pairs(&dist), vec![("a", 2), ("b", 1)]);
    }

    #[test]
    fn ties_are_lexicographic() {
        let dist = ngram_distribution(&caps(&["a b d", "a b c"]), 3, None, Stemmer::None).unwrap();
        assert_eq!(pairs(&dist), vec![("a b c", 1), ("a b d", 1)]);
    }

    #[test]
    fn injected_trigram_ranks_first() {
        let mut texts = vec![
            "a car passes by quickly",
            "birds chirp in the background",
            "a man speaks and a woman laughs",
            "water flows in a stream",
        ];
        texts.extend([
            "an engine idles followed by a horn",
            "a door slams followed by a scream",
            "thunder rumbles followed by a heavy rain",
            "a bell rings followed by a chime",
            "someone coughs followed by a sneeze",
        ]);
        let dist = ngram_distribution(&caps(&texts), 3, Some(3), Stemmer::Porter).unwrap();
        assert_eq!(dist[0].ngram, "follow by a");
        assert_eq!(dist[0].count, 5);
        assert_eq!(dist.len(), 3);
    }

    #[test]
    fn unstemmed_unigrams_match_vocabulary() {
        let texts = [
            "Dogs bark loudly!",
            "A dog barks",
            "dogs, dogs and more dogs",
        ];
        let records = vec![ClipRecord::new("x", DatasetTag::Ma, "train").with_captions(texts)];
        let dist = ngram_distribution(&caps(&texts), 1, None, Stemmer::None).unwrap();
        assert_eq!(dist.len(), corpus_stats(&records).vocab_size);
        let stemmed = ngram_distribution(&caps(&texts), 1, None, Stemmer::Porter).unwrap();
        assert!(stemmed.len() < dist.len());
    }

    #[test]
    fn zero_order_is_invalid() {
        assert!(ngram_distribution(&caps(&["a"]), 0, None, Stemmer::None).is_err());
    }
}
