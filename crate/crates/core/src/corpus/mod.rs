//! Caption datasets: preprocessing, manifests, filtering, auditing, sampling
//! and summary statistics.

mod audit;
mod manifest;
mod sampling;
mod stats;
pub mod stem;
mod tokenize;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use audit::{filter_wavcaps, overlap_audit, OverlapReport, OverlapSide};
pub use manifest::{load_manifest, parse_manifest, write_manifest};
pub use sampling::{balanced_epoch, group_by_dataset, select_captions, EpochEntry, EpochPlan};
pub use stats::{corpus_stats, ngram_distribution, CorpusStats, NGramCount};
pub use stem::Stemmer;
pub use tokenize::{preprocess_caption, Rejection, TokenizedCaption, DEFAULT_MAX_WORDS};

/// Source dataset of a clip.
///
/// The four WavCaps sources each get their own tag so that they can carry
/// their own task embedding.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum DatasetTag {
    /// AudioCaps
    Ac,
    /// Clotho
    Cl,
    /// MACS
    Ma,
    /// WavCaps, AudioSet part
    WcAs,
    /// WavCaps, FreeSound part
    WcFs,
    /// WavCaps, SoundBible part
    WcSb,
    /// WavCaps, BBC Sound Effects part
    WcBbc,
    Other(String),
}

impl DatasetTag {
    pub fn name(&self) -> &str {
        match self {
            DatasetTag::Ac => "AC",
            DatasetTag::Cl => "CL",
            DatasetTag::Ma => "MA",
            DatasetTag::WcAs => "WC_AS",
            DatasetTag::WcFs => "WC_FS",
            DatasetTag::WcSb => "WC_SB",
            DatasetTag::WcBbc => "WC_BBC",
            DatasetTag::Other(name) => name,
        }
    }

    pub fn is_wavcaps(&self) -> bool {
        matches!(
            self,
            DatasetTag::WcAs | DatasetTag::WcFs | DatasetTag::WcSb | DatasetTag::WcBbc
        )
    }

    /// Task-embedding token that replaces `<bos>` for this dataset, e.g. `<bos_ac>`.
    pub fn task_token(&self) -> String {
        format!("<bos_{}>", self.name().to_lowercase())
    }
}

impl fmt::Display for DatasetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<String> for DatasetTag {
    fn from(s: String) -> Self {
        match s.to_ascii_uppercase().as_str() {
            "AC" => DatasetTag::Ac,
            "CL" => DatasetTag::Cl,
            "MA" => DatasetTag::Ma,
            "WC_AS" => DatasetTag::WcAs,
            "WC_FS" => DatasetTag::WcFs,
            "WC_SB" => DatasetTag::WcSb,
            "WC_BBC" => DatasetTag::WcBbc,
            _ => DatasetTag::Other(s),
        }
    }
}

impl From<DatasetTag> for String {
    fn from(tag: DatasetTag) -> Self {
        tag.name().to_string()
    }
}

impl FromStr for DatasetTag {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(crate::Error::InvalidArgument("empty dataset tag".into()));
        }
        Ok(DatasetTag::from(s.to_string()))
    }
}

/// One captioned audio clip, as stored in a manifest line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClipRecord {
    pub id: String,
    pub dataset: DatasetTag,
    pub subset: String,
    pub duration_sec: f64,
    pub captions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding_path: Option<PathBuf>,
}

impl ClipRecord {
    pub fn new(id: impl Into<String>, dataset: DatasetTag, subset: impl Into<String>) -> Self {
        ClipRecord {
            id: id.into(),
            dataset,
            subset: subset.into(),
            duration_sec: 0.0,
            captions: Vec::new(),
            source_key: None,
            embedding_path: None,
        }
    }

    pub fn with_duration(mut self, seconds: f64) -> Self {
        self.duration_sec = seconds;
        self
    }

    pub fn with_captions<I, S>(mut self, captions: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.captions = captions.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_source_key(mut self, key: impl Into<String>) -> Self {
        self.source_key = Some(key.into());
        self
    }

    pub fn with_embedding_path(mut self, path: impl Into<PathBuf>) -> Self {
        self.embedding_path = Some(path.into());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_tags_parse_case_insensitively() {
        assert_eq!("ac".parse::<DatasetTag>().unwrap(), DatasetTag::Ac);
        assert_eq!("wc_bbc".parse::<DatasetTag>().unwrap(), DatasetTag::WcBbc);
        assert_eq!(
            "FSD50K".parse::<DatasetTag>().unwrap(),
            DatasetTag::Other("FSD50K".into())
        );
        assert!("  ".parse::<DatasetTag>().is_err());
    }

    #[test]
    fn task_tokens() {
        assert_eq!(DatasetTag::Cl.task_token(), "<bos_cl>");
        assert_eq!(DatasetTag::WcFs.task_token(), "<bos_wc_fs>");
        assert!(DatasetTag::WcSb.is_wavcaps());
        assert!(!DatasetTag::Ma.is_wavcaps());
    }
}
