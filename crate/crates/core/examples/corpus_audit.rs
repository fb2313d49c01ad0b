//! Filter a WavCaps-style pool, audit source-key overlap with an evaluation
//! set and draw a balanced training epoch.

use std::collections::HashSet;

use capkit::corpus::{
    balanced_epoch, filter_wavcaps, group_by_dataset, overlap_audit, ClipRecord, DatasetTag,
    OverlapSide,
};

fn clip(id: &str, tag: DatasetTag, secs: f64, key: &str) -> ClipRecord {
    ClipRecord::new(id, tag, "train")
        .with_duration(secs)
        .with_captions(["a sound is heard"])
        .with_source_key(key)
}

fn main() -> capkit::Result<()> {
    let eval_set: Vec<ClipRecord> = (0..10)
        .map(|i| {
            clip(
                &format!("ac_test_{i}"),
                DatasetTag::Ac,
                10.0,
                &format!("yt{i}"),
            )
        })
        .collect();
    let pool: Vec<ClipRecord> = (0..40)
        .map(|i| {
            let secs = if i % 5 == 0 { 55.0 } else { 12.0 };
            clip(
                &format!("wc_{i}"),
                DatasetTag::WcAs,
                secs,
                &format!("yt{}", i + 7),
            )
        })
        .collect();

    let report = overlap_audit(&eval_set, OverlapSide::Records(&pool))?;
    println!(
        "{} vs {}: {}/{} clips shared ({:.1}%)",
        report.dataset_a, report.dataset_b, report.matched_a, report.size_a, report.overlap_pct
    );

    let leaked: HashSet<String> = eval_set
        .iter()
        .filter_map(|r| r.source_key.clone())
        .collect();
    let kept = filter_wavcaps(&pool, 30.0, &leaked);
    println!("kept {} of {} WavCaps clips", kept.len(), pool.len());

    let mut train = kept;
    train.extend((0..8).map(|i| clip(&format!("cl_{i}"), DatasetTag::Cl, 20.0, &format!("fs{i}"))));
    let plan = balanced_epoch(&DatasetTag::Cl, &group_by_dataset(&train), 42)?;
    let target = plan
        .entries
        .iter()
        .filter(|e| e.dataset == DatasetTag::Cl)
        .count();
    println!("epoch of {} clips, {target} from CL", plan.entries.len());
    Ok(())
}
