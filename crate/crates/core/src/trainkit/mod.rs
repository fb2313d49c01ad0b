//! Numeric building blocks for training a captioner.

mod config;
mod loss;
mod mixup;
mod optim;
mod schedule;
mod specaug;

pub use config::{Preset, TrainConfig};
pub use loss::{label_smoothed_ce, label_smoothed_ce_grad, log_softmax, smoothed_target};
pub use mixup::{
    draw_lambda, fold_lambda, mixup_pair, mixup_partners, mixup_with_lambda, Mixed, MixupDraw,
};
pub use optim::{adamw_step, clip_grad_l2, global_grad_norm, AdamWConfig, ParamGroup};
pub use schedule::cosine_lr;
pub use specaug::{spec_augment_embed, MaskPlan, SpecAugmentConfig};
