use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A system output line: `{"id": ..., "caption": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    pub caption: String,
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            line: idx + 1,
            msg: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

pub fn load_candidates(path: impl AsRef<Path>) -> Result<Vec<Candidate>> {
    read_jsonl(path.as_ref())
}

/// Read `{"id": ..., "spice": ...}` lines into an id → score map.
pub fn load_spice_sidecar(path: impl AsRef<Path>) -> Result<HashMap<String, f64>> {
    #[derive(Deserialize)]
    struct Line {
        id: String,
        spice: f64,
    }
    let lines: Vec<Line> = read_jsonl(path.as_ref())?;
    let mut map = HashMap::with_capacity(lines.len());
    for line in lines {
        if !line.spice.is_finite() {
            return Err(Error::NonFinite(format!("SPICE score of `{}`", line.id)));
        }
        if map.insert(line.id.clone(), line.spice).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate SPICE entry for `{}`",
                line.id
            )));
        }
    }
    Ok(map)
}
