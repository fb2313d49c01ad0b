//! Caption evaluation: CIDEr-D, SPIDEr, vocabulary diversity and the
//! cross-referencing top-line.

mod cider;
mod crossref;
mod eval;
mod io;
mod ngram;

pub use cider::{cider_d, CiderD, CIDER_SCALE, CIDER_SIGMA};
pub use crossref::{cross_reference, holdout_choices, ReferenceSet};
pub use eval::{
    diversity_stats, evaluate, spider, DiversityStats, EvalItem, EvalResult, ItemScores,
    SpiderScores,
};
pub use io::{load_candidates, load_spice_sidecar, Candidate};
pub use ngram::{ngram_counts, NGram, NGramIndex, TfIdfVector, MAX_NGRAM};
