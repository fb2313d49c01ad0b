//! The SEMB sentence-embedding store.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! b"SEMB" | u32 version = 1 | u32 count | u32 dim
//! count × ( u16 key_len | key (UTF-8) | dim × f32 )
//! ```
//!
//! Keys are the lowercase hex SHA-256 of the caption's UTF-8 bytes, so one
//! store serves both candidates and references.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::binio::{put_f32s, put_string, put_u32, Reader};
use crate::{Error, Result};

pub const SEMB_MAGIC: &[u8; 4] = b"SEMB";
pub const SEMB_VERSION: u32 = 1;

/// Lowercase hex SHA-256 of the caption bytes.
pub fn caption_key(caption: &str) -> String {
    hex::encode(Sha256::digest(caption.as_bytes()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEmbeddingStore {
    dim: usize,
    vectors: BTreeMap<String, Vec<f32>>,
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format {
        format: "SEMB",
        msg: msg.into(),
    }
}

impl SentenceEmbeddingStore {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "embedding dim must be positive".into(),
            ));
        }
        Ok(SentenceEmbeddingStore {
            dim,
            vectors: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Insert under an explicit key, replacing any previous vector.
    pub fn insert_key(&mut self, key: impl Into<String>, vector: Vec<f32>) -> Result<()> {
        let key = key.into();
        if vector.len() != self.dim {
            return Err(Error::Shape(format!(
                "embedding for {key} has dim {}, store dim is {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("embedding for {key}")));
        }
        if key.len() > u16::MAX as usize {
            return Err(Error::InvalidArgument(format!(
                "key of {} bytes is too long",
                key.len()
            )));
        }
        self.vectors.insert(key, vector);
        Ok(())
    }

    pub fn insert_caption(&mut self, caption: &str, vector: Vec<f32>) -> Result<()> {
        self.insert_key(caption_key(caption), vector)
    }

    pub fn get_key(&self, key: &str) -> Option<&[f32]> {
        self.vectors.get(key).map(Vec::as_slice)
    }

    pub fn get_caption(&self, caption: &str) -> Option<&[f32]> {
        self.get_key(&caption_key(caption))
    }

    /// Like [`get_caption`](Self::get_caption) but failing with the missing key.
    pub fn require_caption(&self, caption: &str) -> Result<&[f32]> {
        let key = caption_key(caption);
        self.get_key(&key).ok_or(Error::MissingEmbedding(key))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    pub fn read_from(mut reader: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        reader
            .read_to_end(&mut bytes)
            .map_err(|e| format_err(format!("read failed: {e}")))?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Reader::new(bytes, "SEMB");
        cur.magic(SEMB_MAGIC)?;
        cur.version(SEMB_VERSION)?;
        let count = cur.u32()? as usize;
        let dim = cur.u32()? as usize;
        if dim == 0 {
            return Err(format_err("dim is 0"));
        }
        let mut store = SentenceEmbeddingStore::new(dim)?;
        for entry in 0..count {
            let key = cur
                .string()
                .map_err(|e| format_err(format!("entry {entry}: {e}")))?;
            let vector = cur.f32s(dim)?;
            if store.vectors.contains_key(&key) {
                return Err(format_err(format!("duplicate key {key}")));
            }
            store
                .insert_key(key, vector)
                .map_err(|e| format_err(format!("entry {entry}: {e}")))?;
        }
        cur.finish()?;
        Ok(store)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Format { format, msg } => Error::Format {
                format,
                msg: format!("{}: {msg}", path.display()),
            },
            other => other,
        })
    }

    /// Serialize with entries sorted by key, so equal stores give equal bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.len() * (66 + 4 * self.dim));
        out.extend_from_slice(SEMB_MAGIC);
        put_u32(&mut out, SEMB_VERSION);
        put_u32(&mut out, self.len() as u32);
        put_u32(&mut out, self.dim as u32);
        for (key, vector) in &self.vectors {
            put_string(&mut out, key);
            put_f32s(&mut out, vector.iter().copied());
        }
        out
    }

    pub fn write_to(&self, mut writer: impl Write) -> std::io::Result<()> {
        writer.write_all(&self.to_bytes())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Check that `bytes` is a well-formed SEMB file and return `(count, dim)`.
pub fn validate_semb(bytes: &[u8]) -> Result<(usize, usize)> {
    let store = SentenceEmbeddingStore::from_bytes(bytes)?;
    Ok((store.len(), store.dim()))
}
