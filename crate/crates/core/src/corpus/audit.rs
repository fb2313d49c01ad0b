use std::collections::{BTreeSet, HashMap, HashSet};

use serde::Serialize;

use super::{ClipRecord, DatasetTag};
use crate::{Error, Result};

/// Keep clips lasting at most `max_duration_sec` whose `source_key` is not
/// excluded. Clips without a source key are only subject to the duration test.
pub fn filter_wavcaps(
    records: &[ClipRecord],
    max_duration_sec: f64,
    exclusion_keys: &HashSet<String>,
) -> Vec<ClipRecord> {
    records
        .iter()
        .filter(|r| r.duration_sec <= max_duration_sec)
        .filter(|r| {
            r.source_key
                .as_ref()
                .is_none_or(|key| !exclusion_keys.contains(key))
        })
        .cloned()
        .collect()
}

/// Second operand of an overlap audit.
#[derive(Debug, Clone, Copy)]
pub enum OverlapSide<'a> {
    Records(&'a [ClipRecord]),
    /// Bare upstream identifiers, e.g. the file list of a tagging dataset.
    Keys {
        dataset: &'a DatasetTag,
        keys: &'a [String],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapReport {
    pub dataset_a: DatasetTag,
    pub dataset_b: DatasetTag,
    pub size_a: usize,
    pub matched_a: usize,
    /// Every `(id_a, id_b)` pair with equal source keys, listed once. For a
    /// key-list operand `id_b` is the key itself.
    pub matched_ids: Vec<(String, String)>,
    /// `100 * matched_a / size_a`
    pub overlap_pct: f64,
}

/// Exact `source_key` matching between two datasets.
pub fn overlap_audit(a: &[ClipRecord], b: OverlapSide<'_>) -> Result<OverlapReport> {
    if a.is_empty() {
        return Err(Error::InvalidArgument(
            "overlap audit needs a non-empty dataset A".into(),
        ));
    }
    let mut missing: Vec<String> = a
        .iter()
        .filter(|r| r.source_key.is_none())
        .map(|r| r.id.clone())
        .collect();

    let mut b_index: HashMap<&str, Vec<&str>> = HashMap::new();
    let dataset_b = match b {
        OverlapSide::Records(records) => {
            for r in records {
                match &r.source_key {
                    Some(key) => b_index.entry(key).or_default().push(&r.id),
                    None => missing.push(r.id.clone()),
                }
            }
            records
                .first()
                .map(|r| r.dataset.clone())
                .unwrap_or_else(|| DatasetTag::Other("empty".into()))
        }
        OverlapSide::Keys { dataset, keys } => {
            for key in keys {
                b_index.entry(key).or_default().push(key);
            }
            dataset.clone()
        }
    };
    if !missing.is_empty() {
        return Err(Error::MissingSourceKey { ids: missing });
    }

    let mut matched_ids = Vec::new();
    let mut matched_a = 0;
    for record in a {
        let key = record.source_key.as_deref().unwrap_or_default();
        if let Some(ids_b) = b_index.get(key) {
            matched_a += 1;
            let unique: BTreeSet<&str> = ids_b.iter().copied().collect();
            matched_ids.extend(
                unique
                    .into_iter()
                    .map(|id_b| (record.id.clone(), id_b.to_string())),
            );
        }
    }

    Ok(OverlapReport {
        dataset_a: a[0].dataset.clone(),
        dataset_b,
        size_a: a.len(),
        matched_a,
        matched_ids,
        overlap_pct: 100.0 * matched_a as f64 / a.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip(id: &str, tag: DatasetTag, secs: f64, key: Option<&str>) -> ClipRecord {
        let mut r = ClipRecord::new(id, tag, "train")
            .with_duration(secs)
            .with_captions(["x"]);
        r.source_key = key.map(str::to_string);
        r
    }

    #[test]
    fn duration_boundary_is_inclusive() {
        let records = vec![
            clip("long", DatasetTag::WcFs, 45.0, None),
            clip("edge", DatasetTag::WcFs, 30.0, None),
            clip("short", DatasetTag::WcFs, 2.0, None),
        ];
        let kept = filter_wavcaps(&records, 30.0, &HashSet::new());
        let ids: Vec<_> = kept.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, vec!["edge", "short"]);
    }

    #[test]
    fn excluded_keys_are_removed() {
        let records = vec![
            clip("a", DatasetTag::WcAs, 10.0, Some("yt-1")),
            clip("b", DatasetTag::WcAs, 10.0, Some("yt-2")),
        ];
        let exclude: HashSet<String> = ["yt-1".to_string()].into();
        let kept = filter_wavcaps(&records, 30.0, &exclude);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "b");
    }

    #[test]
    fn full_and_disjoint_overlap() {
        let a: Vec<_> = (0..10)
            .map(|i| {
                clip(
                    &format!("ac{i}"),
                    DatasetTag::Ac,
                    10.0,
                    Some(&format!("yt{i}")),
                )
            })
            .collect();
        let as_train: Vec<String> = (0..50).map(|i| format!("yt{i}")).collect();
        let tag = DatasetTag::Other("AS-train".into());
        let report = overlap_audit(
            &a,
            OverlapSide::Keys {
                dataset: &tag,
                keys: &as_train,
            },
        )
        .unwrap();
        assert_eq!(report.overlap_pct, 100.0);
        assert_eq!(report.matched_ids.len(), 10);
        assert_eq!(
            report.matched_ids[3],
            ("ac3".to_string(), "yt3".to_string())
        );

        let other: Vec<String> = (100..120).map(|i| format!("yt{i}")).collect();
        let report = overlap_audit(
            &a,
            OverlapSide::Keys {
                dataset: &tag,
                keys: &other,
            },
        )
        .unwrap();
        assert_eq!(report.overlap_pct, 0.0);
        assert!(report.matched_ids.is_empty());
    }

    #[test]
    fn partial_overlap_counts_clips_of_a() {
        let a: Vec<_> = (0..100)
            .map(|i| {
                clip(
                    &format!("cl{i}"),
                    DatasetTag::Cl,
                    20.0,
                    Some(&format!("fs{i}")),
                )
            })
            .collect();
        // 89 shared keys, one of them present twice on the B side.
        let mut b: Vec<_> = (11..100)
            .map(|i| {
                clip(
                    &format!("wc{i}"),
                    DatasetTag::WcFs,
                    20.0,
                    Some(&format!("fs{i}")),
                )
            })
            .collect();
        b.push(clip("wc-dup", DatasetTag::WcFs, 5.0, Some("fs50")));
        b.push(clip("wc-extra", DatasetTag::WcFs, 5.0, Some("fs-other")));
        let report = overlap_audit(&a, OverlapSide::Records(&b)).unwrap();
        assert_eq!(report.matched_a, 89);
        assert_eq!(report.overlap_pct, 89.0);
        assert_eq!(report.matched_ids.len(), 90);
        assert_eq!(report.dataset_b, DatasetTag::WcFs);
    }

    #[test]
    fn missing_keys_are_listed() {
        let a = vec![
            clip("a1", DatasetTag::Ac, 1.0, Some("k")),
            clip("a2", DatasetTag::Ac, 1.0, None),
        ];
        let b = vec![clip("b1", DatasetTag::WcAs, 1.0, None)];
        match overlap_audit(&a, OverlapSide::Records(&b)) {
            Err(Error::MissingSourceKey { ids }) => assert_eq!(ids, vec!["a2", "b1"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn self_overlap_is_total() {
        let a: Vec<_> = (0..7)
            .map(|i| {
                clip(
                    &format!("x{i}"),
                    DatasetTag::Ma,
                    1.0,
                    Some(&format!("k{}", i % 3)),
                )
            })
            .collect();
        let report = overlap_audit(&a, OverlapSide::Records(&a)).unwrap();
        assert_eq!(report.overlap_pct, 100.0);
        let unique: BTreeSet<_> = report.matched_ids.iter().collect();
        assert_eq!(unique.len(), report.matched_ids.len());
    }
}
