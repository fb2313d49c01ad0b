//! A minimal captioner: mean-pooled audio features plus the mean embedding
//! of the words so far, mapped log-linearly to the next-word distribution.
//! Gradients are derived by hand, which keeps every training-time procedure
//! of [`crate::trainkit`] testable end to end.

mod aemb;
mod checkpoint;
mod model;
mod synth;
mod train;

pub use aemb::{aemb_from_bytes, aemb_to_bytes, read_aemb, write_aemb, AEMB_MAGIC, AEMB_VERSION};
pub use checkpoint::{
    checkpoint_from_bytes, checkpoint_to_bytes, load_checkpoint, save_checkpoint, CKPT_MAGIC,
    CKPT_VERSION,
};
pub use model::{
    batch_loss, loss_and_grad, AudioContext, Example, ToyModel, ToyParams, PARAM_NAMES,
};
pub use synth::{
    bag_of_words_store, generate_two_style, synth_captions, SynthConfig, ToyCorpus, CLASSES,
};
pub use train::{
    build_vocabulary, toy_train_config, train_toy, EpochMetrics, Selection, ToyOptions,
    TrainOutcome,
};
