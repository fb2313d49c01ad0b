//! Toolkit for audio-captioning experiments.
//!
//! The crate covers the non-neural side of a captioning system:
//!
//! - [`corpus`]: caption preprocessing, JSONL manifests, WavCaps filtering,
//!   overlap auditing between datasets, balanced epoch sampling and corpus
//!   statistics.
//! - [`metrics`]: CIDEr-D written from first principles, SPIDEr aggregation,
//!   vocabulary diversity and the cross-referencing human top-line.
//! - [`fense`]: sentence-embedding similarity gated by a rule-based fluency
//!   error detector, plus the `SEMB` embedding store format.
//! - [`decode`]: per-batch constrained beam search with task-embedding
//!   begin-of-sentence tokens.
//! - [`trainkit`]: mixup, label-smoothed cross-entropy, cosine learning-rate
//!   schedule, proportional SpecAugment, AdamW and gradient clipping.
//! - [`toymodel`]: a small log-linear captioner with hand-written gradients
//!   that exercises all of the above end to end.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory
//! (`cargo run -p capkit --example <name>`); the `capkit` binary wraps the
//! same functionality as subcommands.

mod binio;
pub mod cli;
pub mod corpus;
pub mod decode;
pub mod error;
pub mod fense;
pub mod metrics;
pub mod report;
pub mod toymodel;
pub mod trainkit;

pub use error::{Error, Result};
