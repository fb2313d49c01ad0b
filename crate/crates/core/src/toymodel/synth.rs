//! Synthetic two-style corpus.
//!
//! Every clip belongs to one sound class. Its features are Gaussian frames
//! around a class mean, so the class is recoverable from the audio. The
//! caption style depends only on the dataset tag: `AC` clips get short
//! captions ("a dog barks nearby"), `CL` clips long ones ("a dog is barking
//! loudly in the background while people talk").

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use super::aemb::{read_aemb, write_aemb};
use crate::corpus::{load_manifest, write_manifest, ClipRecord, DatasetTag, TokenizedCaption};
use crate::fense::SentenceEmbeddingStore;
use crate::{Error, Result};

/// Sound classes: subject, third-person verb, gerund.
pub const CLASSES: [(&str, &str, &str); 10] = [
    ("dog", "barks", "barking"),
    ("cat", "meows", "meowing"),
    ("bird", "chirps", "chirping"),
    ("man", "speaks", "speaking"),
    ("woman", "laughs", "laughing"),
    ("car", "passes", "passing"),
    ("engine", "idles", "idling"),
    ("bell", "rings", "ringing"),
    ("baby", "cries", "crying"),
    ("crowd", "cheers", "cheering"),
];

const SHORT_TEMPLATES: [&str; 3] = ["a {s} {v}", "a {s} {v} nearby", "a {s} {v} outside"];

const LONG_TEMPLATES: [&str; 3] = [
    "a {s} is {g} loudly in the background while people talk",
    "in the distance a {s} is {g} and the wind blows softly",
    "a {s} is {g} continuously as leaves rustle in the wind",
];

pub fn synth_captions(style: &DatasetTag, class: usize) -> Vec<String> {
    let (s, v, g) = CLASSES[class % CLASSES.len()];
    let templates: &[&str] = if *style == DatasetTag::Cl {
        &LONG_TEMPLATES
    } else {
        &SHORT_TEMPLATES
    };
    templates
        .iter()
        .map(|t| t.replace("{s}", s).replace("{v}", v).replace("{g}", g))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub train_per_style: usize,
    pub val_per_style: usize,
    pub frames: usize,
    pub d_audio: usize,
    /// Standard deviation of per-frame noise around the class mean.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            train_per_style: 100,
            val_per_style: 20,
            frames: 16,
            d_audio: 16,
            noise: 0.5,
            seed: 0,
        }
    }
}

/// Clip records with in-memory audio features.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyCorpus {
    pub records: Vec<ClipRecord>,
    features: BTreeMap<String, Array2<f64>>,
}

fn record_key(r: &ClipRecord) -> String {
    format!("{}/{}/{}", r.dataset, r.subset, r.id)
}

impl ToyCorpus {
    pub fn new(records: Vec<ClipRecord>) -> Self {
        ToyCorpus {
            records,
            features: BTreeMap::new(),
        }
    }

    pub fn set_features(&mut self, record: &ClipRecord, features: Array2<f64>) {
        self.features.insert(record_key(record), features);
    }

    pub fn features(&self, record: &ClipRecord) -> Result<&Array2<f64>> {
        self.features
            .get(&record_key(record))
            .ok_or_else(|| Error::MissingFeatures(record.id.clone()))
    }

    pub fn subset(&self, subset: &str) -> Vec<&ClipRecord> {
        self.records.iter().filter(|r| r.subset == subset).collect()
    }

    /// Read a manifest whose records point at AEMB files through
    /// `embedding_path`, relative to the manifest's directory.
    pub fn load(manifest: impl AsRef<Path>) -> Result<Self> {
        let manifest = manifest.as_ref();
        let base = manifest.parent().unwrap_or(Path::new("."));
        let records = load_manifest(manifest)?;
        let mut corpus = ToyCorpus::new(records.clone());
        for r in &records {
            let rel = r
                .embedding_path
                .as_ref()
                .ok_or_else(|| Error::MissingFeatures(r.id.clone()))?;
            let path = base.join(rel);
            if !path.exists() {
                return Err(Error::MissingFeatures(format!(
                    "{} ({})",
                    r.id,
                    path.display()
                )));
            }
            corpus.set_features(r, read_aemb(&path)?);
        }
        Ok(corpus)
    }

    /// Write `manifest.jsonl` and `features/<dataset>/<subset>/<id>.aemb`
    /// under `dir`. Returns the manifest path.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        let mut records = Vec::with_capacity(self.records.len());
        for r in &self.records {
            let rel = Path::new("features")
                .join(r.dataset.name().to_lowercase())
                .join(&r.subset)
                .join(format!("{}.aemb", r.id));
            let path = dir.join(&rel);
            let parent = path.parent().expect("has parent");
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            write_aemb(&path, self.features(r)?)?;
            records.push(r.clone().with_embedding_path(rel));
        }
        let manifest = dir.join("manifest.jsonl");
        write_manifest(&manifest, &records)?;
        Ok(manifest)
    }

    /// Every word of every caption.
    pub fn words(&self) -> Vec<String> {
        let mut words: Vec<String> = self
            .records
            .iter()
            .flat_map(|r| &r.captions)
            .filter_map(|c| TokenizedCaption::parse(c).ok())
            .flat_map(|c| c.tokens)
            .collect();
        words.sort();
        words.dedup();
        words
    }
}

/// Generate the two-style corpus: `AC` and `CL` clips in `train` and `val`
/// subsets, classes assigned round-robin.
pub fn generate_two_style(cfg: &SynthConfig) -> Result<ToyCorpus> {
    if cfg.frames == 0 || cfg.d_audio == 0 || cfg.train_per_style == 0 {
        return Err(Error::InvalidArgument(
            "synthetic corpus needs frames, dims and clips".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let means: Vec<Vec<f64>> = (0..CLASSES.len())
        .map(|_| {
            (0..cfg.d_audio)
                .map(|_| rng.sample(StandardNormal))
                .collect()
        })
        .collect();

    let mut corpus = ToyCorpus::new(Vec::new());
    for style in [DatasetTag::Ac, DatasetTag::Cl] {
        for (subset, n) in [("train", cfg.train_per_style), ("val", cfg.val_per_style)] {
            for i in 0..n {
                let class = i % CLASSES.len();
                let id = format!("{}_{subset}_{i:04}", style.name().to_lowercase());
                let record = ClipRecord::new(id, style.clone(), subset)
                    .with_duration(10.0)
                    .with_captions(synth_captions(&style, class));
                let features = Array2::from_shape_fn((cfg.frames, cfg.d_audio), |(_, j)| {
                    means[class][j] + cfg.noise * rng.sample::<f64, _>(StandardNormal)
                });
                corpus.set_features(&record, features);
                corpus.records.push(record);
            }
        }
    }
    Ok(corpus)
}

/// A stand-in sentence-embedding store: each word gets a fixed random
/// vector derived from its hash and a caption embeds as the sum of its
/// words. Lets FENSE-based model selection run without a neural encoder.
pub fn bag_of_words_store<'a>(
    captions: impl IntoIterator<Item = &'a str>,
    dim: usize,
) -> Result<SentenceEmbeddingStore> {
    let mut store = SentenceEmbeddingStore::new(dim)?;
    for caption in captions {
        let tokens = TokenizedCaption::parse(caption)
            .map(|c| c.tokens)
            .unwrap_or_default();
        let mut v = vec![0f32; dim];
        for token in &tokens {
            let digest = Sha256::digest(token.as_bytes());
            let seed = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for x in v.iter_mut() {
                *x += rng.sample::<f32, _>(StandardNormal);
            }
        }
        if v.iter().all(|x| *x == 0.0) {
            v[0] = 1.0;
        }
        store.insert_caption(caption, v)?;
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fense::{detect_fluency_errors, Lexicons};

    #[test]
    fn styles_differ_in_length() {
        for class in 0..CLASSES.len() {
            for c in synth_captions(&DatasetTag::Ac, class) {
                assert!((3..=4).contains(&c.split_whitespace().count()), "{c}");
            }
            for c in synth_captions(&DatasetTag::Cl, class) {
                assert!(c.split_whitespace().count() >= 10, "{c}");
            }
        }
    }

    #[test]
    fn templates_are_fluent() {
        let lex = Lexicons::builtin();
        for style in [DatasetTag::Ac, DatasetTag::Cl] {
            for class in 0..CLASSES.len() {
                for c in synth_captions(&style, class) {
                    let cap = TokenizedCaption::parse(&c).unwrap();
                    let verdict = detect_fluency_errors(&cap, &lex);
                    assert!(!verdict.has_error(), "{c}: {:?}", verdict.triggered_rules);
                }
            }
        }
    }

    #[test]
    fn generation_is_seeded() {
        let cfg = SynthConfig {
            train_per_style: 5,
            val_per_style: 2,
            ..Default::default()
        };
        let a = generate_two_style(&cfg).unwrap();
        let b = generate_two_style(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 14);
        assert_eq!(a.subset("val").len(), 4);
        let c = generate_two_style(&SynthConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(
            a.features(&a.records[0]).unwrap(),
            c.features(&c.records[0]).unwrap()
        );
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SynthConfig {
            train_per_style: 3,
            val_per_style: 1,
            ..Default::default()
        };
        let corpus = generate_two_style(&cfg).unwrap();
        let manifest = corpus.save(dir.path()).unwrap();
        let back = ToyCorpus::load(&manifest).unwrap();
        let r = &back.records[0];
        let saved = corpus.features(&corpus.records[0]).unwrap();
        let loaded = back.features(r).unwrap();
        for (a, b) in saved.iter().zip(loaded) {
            assert_eq!(*a as f32 as f64, *b);
        }

        fs::remove_file(dir.path().join(r.embedding_path.as_ref().unwrap())).unwrap();
        let err = ToyCorpus::load(&manifest).unwrap_err();
        assert!(matches!(err, Error::MissingFeatures(ref id) if id.starts_with(&r.id)));
    }

    #[test]
    fn bag_of_words_is_order_free() {
        let store = bag_of_words_store(["a dog barks", "barks dog a"], 8).unwrap();
        let a = store.get_caption("a dog barks").unwrap();
        let b = store.get_caption("barks dog a").unwrap();
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-5);
        }
    }
}
