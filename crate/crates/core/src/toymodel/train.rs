use ndarray::{Array1, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::model::{batch_loss, loss_and_grad, AudioContext, Example, ToyModel, ToyParams};
use super::synth::ToyCorpus;
use crate::corpus::{
    balanced_epoch, group_by_dataset, select_captions, ClipRecord, DatasetTag, TokenizedCaption,
};
use crate::decode::{beam_search, DecodeConfig, Vocabulary};
use crate::fense::{FenseEvaluator, Lexicons};
use crate::trainkit::{
    adamw_step, clip_grad_l2, cosine_lr, draw_lambda, mixup_partners, spec_augment_embed,
    TrainConfig,
};
use crate::{Error, Result};

/// Model and corpus options that sit outside [`TrainConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct ToyOptions {
    pub d_model: usize,
    /// Datasets that get their own task-embedding token. Clips of other
    /// datasets start with `<bos>`.
    pub tasks: Vec<DatasetTag>,
    /// Make this dataset half of every epoch.
    pub balance: Option<DatasetTag>,
    pub train_subset: String,
    pub val_subset: String,
}

impl Default for ToyOptions {
    fn default() -> Self {
        ToyOptions {
            d_model: 32,
            tasks: vec![DatasetTag::Ac, DatasetTag::Cl],
            balance: None,
            train_subset: "train".into(),
            val_subset: "val".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub lr: f64,
    /// Mean batch loss during the epoch (with augmentation).
    pub train_loss: f64,
    /// Teacher-forced loss on the validation subset, no augmentation.
    pub val_loss: Option<f64>,
    pub val_fense: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Fense,
    ValLoss,
    LastEpoch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Parameters of the selected epoch.
    pub model: ToyModel,
    pub best_epoch: usize,
    pub selection: Selection,
    pub trace: Vec<EpochMetrics>,
    /// Validation decodes scored 0 because an embedding was missing.
    pub missing_embeddings: usize,
}

/// Vocabulary over all caption words plus one task token per option task.
pub fn build_vocabulary(corpus: &ToyCorpus, opts: &ToyOptions) -> Result<Vocabulary> {
    Vocabulary::build(corpus.words(), &opts.tasks)
}

fn start_id(vocab: &Vocabulary, dataset: &DatasetTag) -> usize {
    vocab.task_id(dataset).unwrap_or_else(|_| vocab.bos_id())
}

struct Prepared<'a> {
    record: &'a ClipRecord,
    start: usize,
    captions: Vec<Vec<usize>>,
}

fn prepare<'a>(
    corpus: &'a ToyCorpus,
    records: &[&'a ClipRecord],
    vocab: &Vocabulary,
) -> Result<Vec<Prepared<'a>>> {
    records
        .iter()
        .map(|r| {
            corpus.features(r)?;
            let captions = r
                .captions
                .iter()
                .filter_map(|c| TokenizedCaption::parse(c).ok())
                .map(|c| vocab.encode(&c.tokens))
                .collect::<Result<Vec<_>>>()?;
            if captions.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "clip {} has no usable caption",
                    r.id
                )));
            }
            Ok(Prepared {
                record: r,
                start: start_id(vocab, &r.dataset),
                captions,
            })
        })
        .collect()
}

fn pooled(features: &ndarray::Array2<f64>) -> Array1<f64> {
    features.mean_axis(Axis(0)).expect("non-empty features")
}

/// Validation loss with every caption of every clip as a target.
fn validation_loss(
    corpus: &ToyCorpus,
    val: &[Prepared],
    params: &ToyParams,
    vocab: &Vocabulary,
    eps: f64,
) -> Result<f64> {
    let mut examples = Vec::new();
    for p in val {
        let x = pooled(corpus.features(p.record)?);
        for c in &p.captions {
            examples.push(Example::teacher_forced(
                x.clone(),
                p.start,
                c,
                vocab.eos_id(),
            ));
        }
    }
    batch_loss(params, &examples, eps)
}

/// Decode the validation clips with their own task token and return the
/// mean FENSE and the number of decodes without a stored embedding.
fn validation_fense(
    corpus: &ToyCorpus,
    val: &[Prepared],
    model: &ToyModel,
    decode: &DecodeConfig,
    evaluator: &FenseEvaluator,
) -> Result<(f64, usize)> {
    let mut total = 0.0;
    let mut missing = 0;
    for p in val {
        let ctx = AudioContext::new(corpus.features(p.record)?.clone())?;
        let task = model
            .vocab
            .task_id(&p.record.dataset)
            .ok()
            .map(|_| p.record.dataset.clone());
        let cfg = DecodeConfig {
            task,
            ..decode.clone()
        };
        let out = beam_search(model, &[&ctx], &model.vocab, &cfg)?;
        let candidate = TokenizedCaption::from_tokens(model.vocab.decode(&out[0].token_ids)?);
        let references: Vec<TokenizedCaption> = p
            .record
            .captions
            .iter()
            .filter_map(|c| TokenizedCaption::parse(c).ok())
            .collect();
        match evaluator.score(&candidate, &references) {
            Ok(score) => total += score.fense,
            Err(Error::MissingEmbedding(_)) => missing += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((total / val.len().max(1) as f64, missing))
}

/// Train the toy captioner.
///
/// Each epoch: optional balanced sampling, one random caption per clip,
/// shuffled mini-batches with SpecAugment on the frame features, mixup with
/// one λ per batch, label-smoothed cross-entropy, ℓ2 clipping and AdamW at
/// the cosine-scheduled learning rate. The returned parameters are those of
/// the best validation epoch: highest FENSE when `fense` is given, lowest
/// validation loss otherwise, or the last epoch without a validation subset.
pub fn train_toy(
    corpus: &ToyCorpus,
    cfg: &TrainConfig,
    opts: &ToyOptions,
    seed: u64,
    fense: Option<&FenseEvaluator>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let train_records = corpus.subset(&opts.train_subset);
    if train_records.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no clips in subset `{}`",
            opts.train_subset
        )));
    }
    let val_records = corpus.subset(&opts.val_subset);
    let vocab = build_vocabulary(corpus, opts)?;
    let train = prepare(corpus, &train_records, &vocab)?;
    let val = prepare(corpus, &val_records, &vocab)?;
    let d_audio = corpus.features(train[0].record)?.ncols();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ToyParams::init_uniform(d_audio, opts.d_model, vocab.len(), &mut rng);
    let mut groups = params.to_groups();
    let decode = DecodeConfig {
        beam_size: cfg.beam_size,
        min_len: cfg.min_len,
        max_len: cfg.max_len,
        stop_words: vocab.ids_of(&Lexicons::builtin().stopwords),
        task: None,
    };
    let pool = opts.balance.as_ref().map(|_| {
        group_by_dataset(
            &train_records
                .iter()
                .map(|r| (*r).clone())
                .collect::<Vec<_>>(),
        )
    });

    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, ToyParams)> = None;
    let mut missing_embeddings = 0;
    let mut step = 0u64;

    for epoch in 0..cfg.epochs {
        let lr = cosine_lr(epoch, cfg.epochs, cfg.lr)?;
        let adamw = cfg.adamw(lr);

        let order: Vec<usize> = match (&opts.balance, &pool) {
            (Some(target), Some(pool)) => {
                let plan = balanced_epoch(target, pool, rng.random())?;
                plan.entries
                    .iter()
                    .map(|e| {
                        train
                            .iter()
                            .position(|p| p.record.id == e.id && p.record.dataset == e.dataset)
                            .expect("plan drawn from the training clips")
                    })
                    .collect()
            }
            _ => {
                let mut order: Vec<usize> = (0..train.len()).collect();
                order.shuffle(&mut rng);
                order
            }
        };
        let picked: Vec<&ClipRecord> = order.iter().map(|&i| train[i].record).collect();
        let caption_idx = select_captions(&picked, rng.random());

        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order
            .chunks(cfg.batch_size)
            .zip(caption_idx.chunks(cfg.batch_size))
        {
            let (items, caps) = chunk;
            let inputs: Vec<(Array1<f64>, usize, &[usize])> = items
                .iter()
                .zip(caps)
                .map(|(&i, &c)| {
                    let p = &train[i];
                    let feats = corpus.features(p.record)?;
                    let feats = if cfg.spec_augment {
                        spec_augment_embed(feats, &cfg.spec_augment_config(), &mut rng)
                    } else {
                        feats.clone()
                    };
                    let caption = &p.captions[c % p.captions.len()];
                    Ok((pooled(&feats), p.start, caption.as_slice()))
                })
                .collect::<Result<_>>()?;

            let examples: Vec<Example> = if cfg.mixup {
                let lambda = draw_lambda(cfg.mixup_alpha, &mut rng)?.lambda;
                let partners = mixup_partners(inputs.len(), &mut rng);
                inputs
                    .iter()
                    .zip(&partners)
                    .map(|((x1, s1, c1), &j)| {
                        let (x2, s2, c2) = &inputs[j];
                        Example::mixed(
                            x1.view(),
                            x2.view(),
                            *s1,
                            c1,
                            *s2,
                            c2,
                            lambda,
                            vocab.pad_id(),
                            vocab.eos_id(),
                        )
                    })
                    .collect::<Result<_>>()?
            } else {
                inputs
                    .iter()
                    .map(|(x, s, c)| Example::teacher_forced(x.clone(), *s, c, vocab.eos_id()))
                    .collect()
            };

            let (loss, grads) = loss_and_grad(&params, &examples, cfg.label_smoothing)?;
            grads.write_grads(&mut groups)?;
            clip_grad_l2(&mut groups, cfg.clip_norm)?;
            step += 1;
            adamw_step(&mut groups, &adamw, step)?;
            params.copy_from_groups(&groups)?;
            epoch_loss += loss;
            batches += 1;
        }

        let mut metrics = EpochMetrics {
            epoch,
            lr,
            train_loss: epoch_loss / batches as f64,
            val_loss: None,
            val_fense: None,
        };
        if !val.is_empty() {
            metrics.val_loss = Some(validation_loss(
                corpus,
                &val,
                &params,
                &vocab,
                cfg.label_smoothing,
            )?);
            let score = match fense {
                Some(evaluator) => {
                    let model = ToyModel::new(params.clone(), vocab.clone())?;
                    let (value, missing) =
                        validation_fense(corpus, &val, &model, &decode, evaluator)?;
                    metrics.val_fense = Some(value);
                    missing_embeddings += missing;
                    value
                }
                None => -metrics.val_loss.unwrap_or(f64::INFINITY),
            };
            if best.as_ref().is_none_or(|(b, _, _)| score > *b) {
                best = Some((score, epoch, params.clone()));
            }
        }
        trace.push(metrics);
    }

    let (best_epoch, selection, params) = match best {
        Some((_, epoch, p)) => (
            epoch,
            if fense.is_some() {
                Selection::Fense
            } else {
                Selection::ValLoss
            },
            p,
        ),
        None => (cfg.epochs - 1, Selection::LastEpoch, params),
    };
    Ok(TrainOutcome {
        model: ToyModel::new(params, vocab)?,
        best_epoch,
        selection,
        trace,
        missing_embeddings,
    })
}

impl ToyModel {
    /// Beam-decode clips of `corpus`, returning caption strings.
    pub fn caption(
        &self,
        features: &[&ndarray::Array2<f64>],
        cfg: &DecodeConfig,
    ) -> Result<Vec<(String, f64)>> {
        let contexts = features
            .iter()
            .map(|f| AudioContext::new((*f).clone()))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&AudioContext> = contexts.iter().collect();
        beam_search(self, &refs, &self.vocab, cfg)?
            .into_iter()
            .map(|d| Ok((self.vocab.decode(&d.token_ids)?.join(" "), d.logprob)))
            .collect()
    }
}

/// Settings used for the small synthetic runs: the AC preset with a larger
/// learning rate, light weight decay and small batches, since the toy model
/// sees a few hundred examples instead of tens of thousands.
pub fn toy_train_config(epochs: usize) -> TrainConfig {
    TrainConfig {
        epochs,
        batch_size: 32,
        lr: 0.02,
        weight_decay: 1e-3,
        max_len: 20,
        ..TrainConfig::ac()
    }
}
