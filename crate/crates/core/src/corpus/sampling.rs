use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClipRecord, DatasetTag};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EpochEntry {
    pub dataset: DatasetTag,
    pub subset: String,
    pub id: String,
}

impl From<&ClipRecord> for EpochEntry {
    fn from(r: &ClipRecord) -> Self {
        EpochEntry {
            dataset: r.dataset.clone(),
            subset: r.subset.clone(),
            id: r.id.clone(),
        }
    }
}

/// Clips seen during one training epoch, half of them from the target dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochPlan {
    pub target_dataset: DatasetTag,
    pub entries: Vec<EpochEntry>,
    pub seed: u64,
}

pub fn group_by_dataset(records: &[ClipRecord]) -> BTreeMap<DatasetTag, Vec<ClipRecord>> {
    let mut pool: BTreeMap<DatasetTag, Vec<ClipRecord>> = BTreeMap::new();
    for r in records {
        pool.entry(r.dataset.clone()).or_default().push(r.clone());
    }
    pool
}

/// Every target clip plus an equal number of clips drawn without replacement
/// from the other datasets, shuffled together.
pub fn balanced_epoch(
    target: &DatasetTag,
    pool: &BTreeMap<DatasetTag, Vec<ClipRecord>>,
    seed: u64,
) -> Result<EpochPlan> {
    let target_records = pool
        .get(target)
        .filter(|records| !records.is_empty())
        .ok_or_else(|| Error::MissingDataset(target.to_string()))?;
    let others: Vec<&ClipRecord> = pool
        .iter()
        .filter(|(tag, _)| *tag != target)
        .flat_map(|(_, records)| records)
        .collect();
    if others.len() < target_records.len() {
        return Err(Error::InsufficientPool {
            needed: target_records.len(),
            available: others.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries: Vec<EpochEntry> = target_records.iter().map(EpochEntry::from).collect();
    let picked = index::sample(&mut rng, others.len(), target_records.len());
    entries.extend(picked.iter().map(|i| EpochEntry::from(others[i])));
    entries.shuffle(&mut rng);

    Ok(EpochPlan {
        target_dataset: target.clone(),
        entries,
        seed,
    })
}

/// Index of the caption used for each clip during one epoch, uniform over the
/// clip's captions.
pub fn select_captions(records: &[&ClipRecord], seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    records
        .iter()
        .map(|r| rng.random_range(0..r.captions.len().max(1)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn records(tag: DatasetTag, n: usize) -> Vec<ClipRecord> {
        (0..n)
            .map(|i| {
                ClipRecord::new(format!("{tag}-{i}"), tag.clone(), "train")
                    .with_duration(10.0)
                    .with_captions(["c"])
            })
            .collect()
    }

    #[test]
    fn plan_is_twice_the_target() {
        let mut all = records(DatasetTag::Cl, 40);
        all.extend(records(DatasetTag::Ac, 30));
        all.extend(records(DatasetTag::WcFs, 30));
        let pool = group_by_dataset(&all);
        let plan = balanced_epoch(&DatasetTag::Cl, &pool, 3).unwrap();
        assert_eq!(plan.entries.len(), 80);
        let target = plan
            .entries
            .iter()
            .filter(|e| e.dataset == DatasetTag::Cl)
            .count();
        assert_eq!(target, 40);
        let unique: HashSet<_> = plan.entries.iter().collect();
        assert_eq!(unique.len(), 80);
    }

    #[test]
    fn seeds_determine_plans() {
        let mut all = records(DatasetTag::Ac, 20);
        all.extend(records(DatasetTag::Ma, 50));
        let pool = group_by_dataset(&all);
        let a = balanced_epoch(&DatasetTag::Ac, &pool, 11).unwrap();
        let b = balanced_epoch(&DatasetTag::Ac, &pool, 11).unwrap();
        let c = balanced_epoch(&DatasetTag::Ac, &pool, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.entries, c.entries);
    }

    #[test]
    fn small_pool_is_an_error() {
        let mut all = records(DatasetTag::Ac, 20);
        all.extend(records(DatasetTag::Ma, 19));
        let pool = group_by_dataset(&all);
        assert!(matches!(
            balanced_epoch(&DatasetTag::Ac, &pool, 0),
            Err(Error::InsufficientPool {
                needed: 20,
                available: 19
            })
        ));
        assert!(matches!(
            balanced_epoch(&DatasetTag::Cl, &pool, 0),
            Err(Error::MissingDataset(_))
        ));
    }

    #[test]
    fn caption_choice_is_seeded_and_in_range() {
        let recs: Vec<ClipRecord> = (0..50)
            .map(|i| {
                ClipRecord::new(i.to_string(), DatasetTag::Cl, "train")
                    .with_captions(["a", "b", "c", "d", "e"])
            })
            .collect();
        let refs: Vec<&ClipRecord> = recs.iter().collect();
        let a = select_captions(&refs, 5);
        assert_eq!(a, select_captions(&refs, 5));
        assert!(a.iter().all(|&i| i < 5));
        assert!(a.iter().collect::<HashSet<_>>().len() > 1);
    }
}
