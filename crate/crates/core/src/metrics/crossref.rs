//! Human top-line by cross-referencing: each item's references take turns
//! acting as a pseudo-candidate scored against the remaining ones.
//!
//! Hold-out protocol, per `seed`: a single `ChaCha8Rng::seed_from_u64(seed)`
//! stream; for every repetition, items are visited in order and the held-out
//! reference index is `rng.random_range(0..n_refs)`. The TF-IDF index is
//! rebuilt for each repetition over the reduced reference sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eval::{evaluate, EvalItem, EvalResult, ItemScores};
use crate::corpus::TokenizedCaption;
use crate::fense::FenseEvaluator;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet {
    pub id: String,
    pub captions: Vec<TokenizedCaption>,
}

/// Held-out reference index per repetition and item.
pub fn holdout_choices(sizes: &[usize], repetitions: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..repetitions)
        .map(|_| sizes.iter().map(|&n| rng.random_range(0..n)).collect())
        .collect()
}

pub fn cross_reference(
    items: &[ReferenceSet],
    repetitions: usize,
    seed: u64,
    fense: Option<&FenseEvaluator>,
) -> Result<EvalResult> {
    if repetitions == 0 {
        return Err(Error::InvalidArgument(
            "repetitions must be at least 1".into(),
        ));
    }
    if items.is_empty() {
        return Err(Error::InvalidArgument("nothing to cross-reference".into()));
    }
    if let Some(item) = items.iter().find(|i| i.captions.len() < 2) {
        return Err(Error::TooFewReferences {
            item: item.id.clone(),
            found: item.captions.len(),
            required: 2,
        });
    }

    let sizes: Vec<usize> = items.iter().map(|i| i.captions.len()).collect();
    let runs = holdout_choices(&sizes, repetitions, seed)
        .into_iter()
        .map(|choice| {
            let eval_items: Vec<EvalItem> = items
                .iter()
                .zip(choice)
                .map(|(item, held)| {
                    let mut references = item.captions.clone();
                    let candidate = references.remove(held);
                    EvalItem {
                        id: item.id.clone(),
                        candidate,
                        references,
                        spice: None,
                    }
                })
                .collect();
            evaluate(&eval_items, fense)
        })
        .collect::<Result<Vec<_>>>()?;

    let reps = runs.len() as f64;
    let avg = |f: &dyn Fn(&EvalResult) -> f64| runs.iter().map(f).sum::<f64>() / reps;
    let item_scores = (0..items.len())
        .map(|i| {
            let fense_mean = fense.map(|_| {
                runs.iter()
                    .map(|r| r.items[i].fense.unwrap_or(0.0))
                    .sum::<f64>()
                    / reps
            });
            ItemScores {
                id: items[i].id.clone(),
                cider_d: runs.iter().map(|r| r.items[i].cider_d).sum::<f64>() / reps,
                spice: None,
                spider: None,
                fense: fense_mean,
                empty_candidate: false,
            }
        })
        .collect();

    Ok(EvalResult {
        cider_d: avg(&|r| r.cider_d),
        spice: None,
        spider: None,
        fense: fense.map(|_| avg(&|r| r.fense.unwrap_or(0.0))),
        n_unique_words: avg(&|r| r.n_unique_words),
        mean_sentence_length: avg(&|r| r.mean_sentence_length),
        items: item_scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(id: &str, texts: &[&str]) -> ReferenceSet {
        ReferenceSet {
            id: id.into(),
            captions: texts
                .iter()
                .map(|t| TokenizedCaption::parse(t).unwrap())
                .collect(),
        }
    }

    #[test]
    fn identical_references_give_ten() {
        let items = vec![
            set("a", &["a dog barks loudly"; 5]),
            set("b", &["rain falls on the roof"; 5]),
            set("c", &["an engine idles nearby"; 5]),
        ];
        let result = cross_reference(&items, 5, 1, None).unwrap();
        assert_eq!(result.cider_d, 10.0);
    }

    #[test]
    fn seeded_runs_repeat() {
        let items = vec![
            set("a", &["a dog barks", "dog barking loudly", "a puppy yelps"]),
            set("b", &["rain falls", "heavy rain on a roof"]),
            set("c", &["an engine idles", "a motor runs", "engine humming"]),
        ];
        let first = cross_reference(&items, 5, 7, None).unwrap();
        assert_eq!(first, cross_reference(&items, 5, 7, None).unwrap());
        assert_eq!(first.items.len(), 3);
    }

    #[test]
    fn single_reference_items_are_rejected() {
        let items = vec![set("a", &["x y", "y z"]), set("lonely", &["only one"])];
        let err = cross_reference(&items, 1, 0, None).unwrap_err();
        assert!(
            matches!(err, Error::TooFewReferences { ref item, found: 1, .. } if item == "lonely")
        );
        assert!(cross_reference(&items[..1], 0, 0, None).is_err());
    }

    #[test]
    fn choices_stay_in_range() {
        let choices = holdout_choices(&[2, 5, 3], 4, 9);
        assert_eq!(choices.len(), 4);
        for rep in choices {
            assert!(rep[0] < 2 && rep[1] < 5 && rep[2] < 3);
        }
    }
}
