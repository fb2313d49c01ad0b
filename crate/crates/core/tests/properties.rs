mod common;

use std::collections::BTreeSet;

use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use capkit::corpus::{balanced_epoch, group_by_dataset, ClipRecord, DatasetTag, TokenizedCaption};
use capkit::decode::{beam_search, DecodeConfig, Scorer, Vocabulary};
use capkit::fense::{caption_key, cosine, SentenceEmbeddingStore};
use capkit::metrics::{evaluate, EvalItem};
use capkit::toymodel::{aemb_from_bytes, aemb_to_bytes};
use capkit::trainkit::{
    cosine_lr, fold_lambda, label_smoothed_ce_grad, mixup_with_lambda, MaskPlan, SpecAugmentConfig,
};

const WORDS: [&str; 8] = ["a", "dog", "barks", "rain", "falls", "on", "the", "roof"];

fn caption() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(&WORDS[..]), 1..9)
        .prop_map(|w| w.into_iter().map(String::from).collect())
}

fn item() -> impl Strategy<Value = (Vec<String>, Vec<Vec<String>>)> {
    (caption(), prop::collection::vec(caption(), 1..4))
}

fn tc(tokens: &[String]) -> TokenizedCaption {
    TokenizedCaption::from_tokens(tokens.iter().cloned())
}

proptest! {
    #[test]
    fn cider_matches_oracle_and_stays_in_range(items in prop::collection::vec(item(), 1..6)) {
        let eval: Vec<EvalItem> = items
            .iter()
            .enumerate()
            .map(|(i, (c, refs))| EvalItem::new(i.to_string(), tc(c), refs.iter().map(|r| tc(r)).collect()))
            .collect();
        let result = evaluate(&eval, None).unwrap();
        let cands: Vec<Vec<String>> = items.iter().map(|(c, _)| c.clone()).collect();
        let refs: Vec<Vec<Vec<String>>> = items.iter().map(|(_, r)| r.clone()).collect();
        for (got, want) in result.items.iter().zip(common::cider_oracle(&cands, &refs)) {
            prop_assert!((got.cider_d - want).abs() <= 1e-9);
            prop_assert!((0.0..=10.0 + 1e-12).contains(&got.cider_d));
        }
    }

    #[test]
    fn cosine_schedule_is_monotone(total in 1usize..500, lr0 in 1e-6f64..1.0) {
        let mut prev = f64::INFINITY;
        for k in 0..=total {
            let lr = cosine_lr(k, total, lr0).unwrap();
            prop_assert!(lr <= prev + 1e-18);
            prop_assert!((-1e-18..=lr0).contains(&lr));
            prev = lr;
        }
    }

    #[test]
    fn mixup_is_a_folded_convex_combination(
        x1 in prop::collection::vec(-5.0f64..5.0, 3),
        x2 in prop::collection::vec(-5.0f64..5.0, 3),
        lambda in 0.0f64..=1.0,
    ) {
        let (a, b) = (Array1::from(x1), Array1::from(x2));
        let w = Array2::<f64>::zeros((2, 2));
        let mixed = mixup_with_lambda(a.view(), b.view(), w.view(), w.view(), lambda).unwrap();
        prop_assert!(mixed.lambda >= 0.5);
        prop_assert_eq!(mixed.lambda, fold_lambda(lambda));
        for i in 0..3 {
            let (lo, hi) = (a[i].min(b[i]), a[i].max(b[i]));
            prop_assert!(mixed.x[i] >= lo - 1e-12 && mixed.x[i] <= hi + 1e-12);
        }
    }

    #[test]
    fn smoothed_ce_gradient_sums_to_zero(
        logits in prop::collection::vec(-20.0f64..20.0, 2..12),
        target_seed in any::<usize>(),
        epsilon in 0.0f64..0.9,
    ) {
        let target = target_seed % logits.len();
        let (loss, grad) = label_smoothed_ce_grad(&logits, target, epsilon).unwrap();
        prop_assert!(loss >= 0.0);
        prop_assert!(grad.iter().sum::<f64>().abs() <= 1e-12);
    }

    #[test]
    fn spec_augment_masks_are_bounded(t in 1usize..80, f in 1usize..40, seed in any::<u64>()) {
        let cfg = SpecAugmentConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plan = MaskPlan::sample(t, f, &cfg, &mut rng);
        prop_assert_eq!(plan.time.len(), 2);
        prop_assert_eq!(plan.feature.len(), 2);
        for r in &plan.time {
            prop_assert!(r.len() <= t / 10 && r.end <= t);
        }
        for r in &plan.feature {
            prop_assert!(r.len() <= f / 10 && r.end <= f);
        }
        let mut x = Array2::from_elem((t, f), 1.0);
        plan.apply(&mut x, 0.0);
        for ((i, j), v) in x.indexed_iter() {
            prop_assert_eq!(*v == 0.0, plan.is_masked(i, j));
        }
    }

    #[test]
    fn semb_matches_the_documented_layout(
        captions in prop::collection::btree_set("[a-z ]{0,20}", 1..6),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = SentenceEmbeddingStore::new(4).unwrap();
        let mut entries = Vec::new();
        for c in &captions {
            let v: Vec<f32> = (0..4).map(|_| rng.random_range(0.1f32..1.0)).collect();
            store.insert_caption(c, v.clone()).unwrap();
            entries.push((caption_key(c), v));
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        prop_assert_eq!(store.to_bytes(), common::semb_bytes(4, &entries));
        let back = SentenceEmbeddingStore::from_bytes(&store.to_bytes()).unwrap();
        for c in &captions {
            let v = back.get_caption(c).unwrap();
            prop_assert_eq!(cosine(v, v).unwrap(), 1.0);
        }
    }

    #[test]
    fn aemb_round_trips_through_f32(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((rows, cols), |_| rng.random_range(-3.0f32..3.0) as f64);
        prop_assert_eq!(aemb_from_bytes(&aemb_to_bytes(&x)).unwrap(), x);
    }

    #[test]
    fn balanced_epochs_are_half_target(n_target in 1usize..60, extra in 0usize..60, seed in any::<u64>()) {
        let mut records = Vec::new();
        for i in 0..n_target {
            records.push(ClipRecord::new(format!("t{i}"), DatasetTag::Cl, "train"));
        }
        for i in 0..n_target + extra {
            let tag = if i % 2 == 0 { DatasetTag::Ac } else { DatasetTag::Ma };
            records.push(ClipRecord::new(format!("o{i}"), tag, "train"));
        }
        let plan = balanced_epoch(&DatasetTag::Cl, &group_by_dataset(&records), seed).unwrap();
        prop_assert_eq!(plan.entries.len(), 2 * n_target);
        let target = plan.entries.iter().filter(|e| e.dataset == DatasetTag::Cl).count();
        prop_assert_eq!(target, n_target);
        let distinct: BTreeSet<_> = plan.entries.iter().collect();
        prop_assert_eq!(distinct.len(), plan.entries.len());
    }

    #[test]
    fn tokens_are_clean(raw in "\\PC{0,40}") {
        let punct = regex::Regex::new(r"\p{P}").unwrap();
        if let Ok(c) = TokenizedCaption::parse(&raw) {
            for t in &c.tokens {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_whitespace));
                prop_assert!(!punct.is_match(t));
                prop_assert_eq!(t.to_lowercase(), t.clone());
            }
        }
    }
}

struct Random {
    seed: u64,
    size: usize,
}

impl Scorer for Random {
    type Context = u64;

    fn vocab_size(&self) -> usize {
        self.size
    }

    fn next_logprobs(&self, ctx: &u64, prefix: &[usize]) -> capkit::Result<Vec<f64>> {
        let mix = prefix
            .iter()
            .fold(self.seed ^ ctx.rotate_left(17), |h, &t| {
                h.wrapping_mul(0x100000001b3).wrapping_add(t as u64 + 1)
            });
        let mut rng = ChaCha8Rng::seed_from_u64(mix);
        let z: Vec<f64> = (0..self.size)
            .map(|_| rng.random_range(-4.0..4.0))
            .collect();
        let lse = z.iter().map(|x| x.exp()).sum::<f64>().ln();
        Ok(z.iter().map(|x| x - lse).collect())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beam_outputs_respect_constraints(
        seed in any::<u64>(),
        beam in 1usize..5,
        max_len in 3usize..9,
        n_stop in 0usize..3,
    ) {
        let words: Vec<String> = (0..8).map(|i| format!("w{i}")).collect();
        let vocab = Vocabulary::build(words.clone(), &[DatasetTag::Ac]).unwrap();
        let stop_words = vocab.ids_of(&words[..n_stop]);
        let cfg = DecodeConfig {
            beam_size: beam,
            min_len: 3,
            max_len,
            stop_words: stop_words.clone(),
            task: Some(DatasetTag::Ac),
        };
        let scorer = Random { seed, size: vocab.len() };
        let contexts = [1u64, 2, 3];
        let refs: Vec<&u64> = contexts.iter().collect();
        let out = beam_search(&scorer, &refs, &vocab, &cfg).unwrap();
        prop_assert_eq!(out.len(), 3);
        for d in &out {
            prop_assert!(d.token_ids.len() >= 3 && d.token_ids.len() <= max_len);
            prop_assert!(d.logprob <= 0.0);
            let mut seen = BTreeSet::new();
            for &t in &d.token_ids {
                prop_assert!(!vocab.is_special(t));
                prop_assert!(stop_words.contains(&t) || seen.insert(t));
            }
        }
        let again = beam_search(&scorer, &refs, &vocab, &cfg).unwrap();
        prop_assert_eq!(out, again);
    }
}

#[test]
fn golden_caption_keys_match() {
    let rows = common::golden_caption_keys();
    assert!(rows.len() >= 8);
    for (hash, caption) in rows {
        assert_eq!(caption_key(&caption), hash, "{caption:?}");
    }
}

#[test]
fn store_lookup_uses_the_raw_caption() {
    let raw = "A man speaks while a man speaks.";
    let key = common::golden_key(raw).unwrap();
    let bytes = common::semb_bytes(2, &[(key, vec![0.6, 0.8])]);
    let store = SentenceEmbeddingStore::from_bytes(&bytes).unwrap();
    assert_eq!(store.get_caption(raw), Some(&[0.6f32, 0.8][..]));
    assert_eq!(store.get_caption("a man speaks while a man speaks"), None);
}
