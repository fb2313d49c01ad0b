use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::ClipRecord;
use crate::{Error, Result};

/// Read a JSON-Lines manifest, one [`ClipRecord`] per non-blank line.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ClipRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(BufReader::new(file), path)
}

/// Parse manifest lines from any reader. `origin` is only used in error messages.
pub fn parse_manifest(reader: impl BufRead, origin: &Path) -> Result<Vec<ClipRecord>> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Manifest {
            path: origin.to_path_buf(),
            line: line_no,
            msg,
        };
        let record: ClipRecord = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        if record.captions.is_empty() {
            return Err(bad(format!("clip `{}` has no captions", record.id)));
        }
        if !(record.duration_sec.is_finite() && record.duration_sec >= 0.0) {
            return Err(bad(format!(
                "clip `{}` has invalid duration {}",
                record.id, record.duration_sec
            )));
        }
        let key = (
            record.dataset.clone(),
            record.subset.clone(),
            record.id.clone(),
        );
        if !seen.insert(key) {
            return Err(Error::DuplicateId {
                id: record.id,
                dataset: record.dataset.to_string(),
                subset: record.subset,
            });
        }
        records.push(record);
    }
    Ok(records)
}

pub fn write_manifest(path: impl AsRef<Path>, records: &[ClipRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DatasetTag;

    fn parse(text: &str) -> Result<Vec<ClipRecord>> {
        parse_manifest(text.as_bytes(), Path::new("mem.jsonl"))
    }

    #[test]
    fn reads_valid_lines_in_order() {
        let text = r#"{"id":"a","dataset":"AC","subset":"train","duration_sec":10.0,"captions":["A dog barks."],"source_key":"yt1"}
{"id":"b","dataset":"CL","subset":"train","duration_sec":21.5,"captions":["x","y"]}

{"id":"c","dataset":"WC_FS","subset":"train","duration_sec":3,"captions":["z"],"embedding_path":"feats/c.aemb"}
"#;
        let records = parse(text).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].source_key.as_deref(), Some("yt1"));
        assert_eq!(records[1].dataset, DatasetTag::Cl);
        assert_eq!(records[2].dataset, DatasetTag::WcFs);
        assert_eq!(
            records[2].embedding_path.as_deref(),
            Some(Path::new("feats/c.aemb"))
        );
    }

    #[test]
    fn missing_captions_reports_line() {
        let text = r#"{"id":"a","dataset":"AC","subset":"train","duration_sec":1.0,"captions":["ok"]}
{"id":"b","dataset":"AC","subset":"train","duration_sec":1.0}
"#;
        match parse(text) {
            Err(Error::Manifest { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("captions"), "{msg}");
            }
            other => panic!("expected manifest error, got {other:?}"),
        }
    }

    #[test]
    fn empty_caption_list_is_rejected() {
        let text = r#"{"id":"a","dataset":"AC","subset":"train","duration_sec":1.0,"captions":[]}"#;
        assert!(matches!(parse(text), Err(Error::Manifest { line: 1, .. })));
    }

    #[test]
    fn duplicate_id_is_named() {
        let text = r#"{"id":"dup","dataset":"AC","subset":"train","duration_sec":1.0,"captions":["a"]}
{"id":"dup","dataset":"AC","subset":"val","duration_sec":1.0,"captions":["a"]}
{"id":"dup","dataset":"AC","subset":"train","duration_sec":1.0,"captions":["a"]}
"#;
        let err = parse(text).unwrap_err();
        assert!(matches!(&err, Error::DuplicateId { id, .. } if id == "dup"));
        assert!(err.to_string().contains("`dup`"));
    }

    #[test]
    fn round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let records = vec![
            ClipRecord::new("a", DatasetTag::Ma, "train")
                .with_duration(10.0)
                .with_captions(["one", "two"]),
            ClipRecord::new("b", DatasetTag::Other("FSD50K".into()), "train")
                .with_duration(2.5)
                .with_captions(["three"])
                .with_source_key("fs-1"),
        ];
        write_manifest(&path, &records).unwrap();
        assert_eq!(load_manifest(&path).unwrap(), records);
    }
}
