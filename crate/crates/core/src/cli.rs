//! The `capkit` command line.
//!
//! Exit codes: 0 on success, 1 on operational errors (one stderr line
//! `capkit-error[<kind>]: <message>`), 2 on usage errors.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::corpus::{
    balanced_epoch, corpus_stats, filter_wavcaps, group_by_dataset, load_manifest,
    ngram_distribution, overlap_audit, write_manifest, ClipRecord, CorpusStats, DatasetTag,
    OverlapReport, OverlapSide, Stemmer, TokenizedCaption,
};
use crate::decode::{
    beam_search, default_stopwords, load_stopwords, te_compare, DecodeConfig, DecodeRecord,
};
use crate::fense::{
    detect_fluency_errors, fense, sbert_sim, Aggregation, FenseEvaluator, Lexicons,
    SentenceEmbeddingStore,
};
use crate::metrics::{
    cross_reference, evaluate, load_candidates, load_spice_sidecar, EvalItem, ReferenceSet,
};
use crate::report::{csv_table, emit, rounded_json, sig6, to_json_pretty, Format};
use crate::toymodel::{
    bag_of_words_store, generate_two_style, load_checkpoint, save_checkpoint, toy_train_config,
    train_toy, AudioContext, SynthConfig, ToyCorpus, ToyModel, ToyOptions,
};
use crate::trainkit::TrainConfig;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "capkit",
    version,
    about = "Audio-captioning corpus, metric and decoding toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corpus statistics of a manifest
    Stats(StatsArgs),
    /// Most frequent n-grams of manifest or candidate captions
    Ngrams(NgramsArgs),
    /// Source-key overlap between datasets
    Overlap(OverlapArgs),
    /// Drop long clips and clips whose source key is excluded
    FilterWc(FilterWcArgs),
    /// Draw one balanced training epoch
    SampleEpoch(SampleEpochArgs),
    /// Score candidates against manifest references
    Eval(EvalArgs),
    /// Human top-line by cross-referencing the references
    Crossref(CrossrefArgs),
    /// FENSE scores with fluency verdicts
    Fense(FenseArgs),
    /// Caption clips with a trained checkpoint
    Decode(DecodeArgs),
    /// Caption clips under two task embeddings and compare
    TeCompare(TeCompareArgs),
    /// Train the toy captioner
    TrainToy(TrainToyArgs),
    /// Write a synthetic two-style corpus
    GenSynth(GenSynthArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct FenseSourceArgs {
    /// Sentence-embedding store (SEMB)
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Directory overriding the fluency word lists
    #[arg(long, env = "CAPKIT_LEXICON_DIR")]
    pub lexicon_dir: Option<PathBuf>,
    /// How similarities to several references are combined
    #[arg(long, value_enum, default_value_t = Aggregation::Max)]
    pub aggregation: Aggregation,
}

#[derive(Debug, Args)]
pub struct DecodeFlags {
    /// Beam width
    #[arg(long, default_value_t = 2)]
    pub beam_size: usize,
    /// Minimum caption length in words
    #[arg(long, default_value_t = 3)]
    pub min_len: usize,
    /// Maximum caption length in words
    #[arg(long, default_value_t = 30)]
    pub max_len: usize,
    /// Stop-word file, one word per line (bundled English list by default)
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Only decode clips of this subset
    #[arg(long)]
    pub subset: Option<String>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Clip manifest (JSONL)
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StemmerArg {
    Porter,
    None,
}

#[derive(Debug, Args)]
pub struct NgramsArgs {
    /// Clip manifest (JSONL)
    #[arg(long, required_unless_present = "candidates")]
    pub manifest: Option<PathBuf>,
    /// Candidate captions (JSONL) instead of manifest captions
    #[arg(long, conflicts_with = "manifest")]
    pub candidates: Option<PathBuf>,
    /// N-gram order
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Keep only the most frequent entries
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Stemming applied before counting
    #[arg(long, value_enum, default_value_t = StemmerArg::Porter)]
    pub stemmer: StemmerArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OverlapArgs {
    /// Manifest of the audited datasets (A side)
    #[arg(long)]
    pub manifest: PathBuf,
    /// Manifest to compare against (repeatable)
    #[arg(long)]
    pub against: Vec<PathBuf>,
    /// Key list to compare against, as DATASET=PATH (repeatable)
    #[arg(long, value_name = "DATASET=PATH")]
    pub keys: Vec<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FilterWcArgs {
    /// Manifest to filter
    #[arg(long)]
    pub manifest: PathBuf,
    /// Longest duration kept, in seconds
    #[arg(long, default_value_t = 30.0)]
    pub max_duration: f64,
    /// File of source keys to drop, one per line (repeatable)
    #[arg(long)]
    pub exclude_keys: Vec<PathBuf>,
    /// Manifest whose source keys are dropped (repeatable)
    #[arg(long)]
    pub exclude_manifest: Vec<PathBuf>,
    /// Filtered manifest
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleEpochArgs {
    /// Training pool manifest
    #[arg(long)]
    pub manifest: PathBuf,
    /// Dataset that fills half of the epoch
    #[arg(long)]
    pub target: DatasetTag,
    /// Random seed
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// System outputs, JSONL lines {"id", "caption"}
    #[arg(long)]
    pub candidates: PathBuf,
    /// Reference manifest
    #[arg(long)]
    pub references: PathBuf,
    /// Precomputed SPICE scores, JSONL lines {"id", "spice"}
    #[arg(long)]
    pub spice_sidecar: Option<PathBuf>,
    #[command(flatten)]
    pub fense: FenseSourceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CrossrefArgs {
    /// Reference manifest
    #[arg(long)]
    pub references: PathBuf,
    /// Number of hold-out repetitions
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    /// Random seed
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub fense: FenseSourceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FenseArgs {
    /// System outputs, JSONL lines {"id", "caption"}
    #[arg(long)]
    pub candidates: PathBuf,
    /// Reference manifest
    #[arg(long)]
    pub references: PathBuf,
    /// Sentence-embedding store (SEMB)
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Directory overriding the fluency word lists
    #[arg(long, env = "CAPKIT_LEXICON_DIR")]
    pub lexicon_dir: Option<PathBuf>,
    /// How similarities to several references are combined
    #[arg(long, value_enum, default_value_t = Aggregation::Max)]
    pub aggregation: Aggregation,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Model checkpoint
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Manifest of clips with AEMB feature paths
    #[arg(long)]
    pub manifest: PathBuf,
    /// Task embedding replacing <bos>
    #[arg(long)]
    pub task: Option<DatasetTag>,
    #[command(flatten)]
    pub decode: DecodeFlags,
    /// Output JSONL (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TeCompareArgs {
    /// Model checkpoint
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Manifest of clips with AEMB feature paths; its captions serve as references
    #[arg(long)]
    pub manifest: PathBuf,
    /// First task embedding
    #[arg(long)]
    pub task_a: DatasetTag,
    /// Second task embedding
    #[arg(long)]
    pub task_b: DatasetTag,
    #[command(flatten)]
    pub decode: DecodeFlags,
    #[command(flatten)]
    pub fense: FenseSourceArgs,
    /// Paired captions, JSONL (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-task statistics table (stdout when omitted)
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Format of the statistics table
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Ac,
    Cl,
    Toy,
}

#[derive(Debug, Args)]
pub struct TrainToyArgs {
    /// Manifest of clips with AEMB feature paths
    #[arg(long)]
    pub manifest: PathBuf,
    /// TOML config; keys override the `base` preset
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Preset used without --config
    #[arg(long, value_enum, default_value_t = PresetArg::Toy, conflicts_with = "config")]
    pub preset: PresetArg,
    /// Random seed
    #[arg(long)]
    pub seed: u64,
    /// Hidden size of the model
    #[arg(long, default_value_t = 32)]
    pub d_model: usize,
    /// Datasets with their own task-embedding token
    #[arg(long, value_delimiter = ',', default_value = "AC,CL")]
    pub tasks: Vec<DatasetTag>,
    /// Make this dataset half of every epoch
    #[arg(long)]
    pub balance: Option<DatasetTag>,
    /// Select the checkpoint by validation FENSE using this SEMB store
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Directory overriding the fluency word lists
    #[arg(long, env = "CAPKIT_LEXICON_DIR")]
    pub lexicon_dir: Option<PathBuf>,
    /// Checkpoint to write
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch metrics file
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Format of the metrics file
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GenSynthArgs {
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Random seed
    #[arg(long)]
    pub seed: u64,
    /// Training clips per caption style
    #[arg(long, default_value_t = 100)]
    pub train_per_style: usize,
    /// Validation clips per caption style
    #[arg(long, default_value_t = 20)]
    pub val_per_style: usize,
    /// Frames per clip
    #[arg(long, default_value_t = 16)]
    pub frames: usize,
    /// Feature dimension
    #[arg(long, default_value_t = 16)]
    pub d_audio: usize,
    /// Standard deviation of frame noise
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
    /// Dimension of the bag-of-words sentence embeddings written to captions.semb
    #[arg(long, default_value_t = 32)]
    pub embedding_dim: usize,
}

/// Parse `argv` (program name first) and run. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!(
                "capkit-error[{}]: {}",
                e.kind(),
                e.to_string().replace('\n', " ")
            );
            1
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Stats(a) => stats(a),
        Command::Ngrams(a) => ngrams(a),
        Command::Overlap(a) => overlap(a),
        Command::FilterWc(a) => filter_wc(a),
        Command::SampleEpoch(a) => sample_epoch(a),
        Command::Eval(a) => eval(a),
        Command::Crossref(a) => crossref(a),
        Command::Fense(a) => fense_cmd(a),
        Command::Decode(a) => decode(a),
        Command::TeCompare(a) => te_compare_cmd(a),
        Command::TrainToy(a) => train_toy_cmd(a),
        Command::GenSynth(a) => gen_synth(a),
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    emit(out, &to_json_pretty(&rounded_json(value)?)?)
}

fn lexicons(dir: Option<&Path>) -> Result<Lexicons> {
    match dir {
        Some(dir) => Lexicons::load_dir(dir),
        None => Ok(Lexicons::builtin()),
    }
}

fn fense_evaluator(args: &FenseSourceArgs) -> Result<Option<FenseEvaluator>> {
    let Some(path) = &args.embeddings else {
        return Ok(None);
    };
    let store = SentenceEmbeddingStore::load(path)?;
    let lex = lexicons(args.lexicon_dir.as_deref())?;
    Ok(Some(
        FenseEvaluator::new(store, lex).with_aggregation(args.aggregation),
    ))
}

/// Tokenize a caption, keeping an empty token list for captions that clean
/// to nothing.
fn tokenize_candidate(raw: &str) -> TokenizedCaption {
    TokenizedCaption::parse(raw).unwrap_or_else(|_| TokenizedCaption {
        tokens: Vec::new(),
        original: raw.to_string(),
    })
}

fn references_by_id(records: &[ClipRecord]) -> Result<HashMap<&str, Vec<TokenizedCaption>>> {
    let mut map = HashMap::with_capacity(records.len());
    for r in records {
        let caps = r
            .captions
            .iter()
            .filter_map(|c| TokenizedCaption::parse(c).ok())
            .collect();
        if map.insert(r.id.as_str(), caps).is_some() {
            return Err(Error::DuplicateId {
                id: r.id.clone(),
                dataset: r.dataset.to_string(),
                subset: r.subset.clone(),
            });
        }
    }
    Ok(map)
}

fn eval_items(candidates: &Path, references: &Path, spice: Option<&Path>) -> Result<Vec<EvalItem>> {
    let cands = load_candidates(candidates)?;
    let records = load_manifest(references)?;
    let refs = references_by_id(&records)?;
    let spice = spice.map(load_spice_sidecar).transpose()?;
    cands
        .into_iter()
        .map(|c| {
            let references = refs.get(c.id.as_str()).cloned().ok_or_else(|| {
                Error::InvalidArgument(format!("no references for candidate `{}`", c.id))
            })?;
            let mut item = EvalItem::new(c.id.clone(), tokenize_candidate(&c.caption), references);
            if let Some(spice) = &spice {
                item.spice = Some(*spice.get(&c.id).ok_or_else(|| {
                    Error::InvalidArgument(format!("no SPICE score for candidate `{}`", c.id))
                })?);
            }
            Ok(item)
        })
        .collect()
}

fn stats(a: StatsArgs) -> Result<()> {
    let records = load_manifest(&a.manifest)?;
    let stats: CorpusStats = corpus_stats(&records);
    match a.output.format {
        Format::Json => emit_json(a.output.out.as_deref(), &stats),
        Format::Csv => emit(
            a.output.out.as_deref(),
            &csv_table(CorpusStats::CSV_HEADER, [stats.csv_values()])?,
        ),
    }
}

fn ngrams(a: NgramsArgs) -> Result<()> {
    let texts: Vec<String> = match (&a.manifest, &a.candidates) {
        (_, Some(path)) => load_candidates(path)?
            .into_iter()
            .map(|c| c.caption)
            .collect(),
        (Some(path), None) => load_manifest(path)?
            .into_iter()
            .flat_map(|r| r.captions)
            .collect(),
        (None, None) => unreachable!("clap requires one source"),
    };
    let captions: Vec<TokenizedCaption> = texts
        .iter()
        .filter_map(|t| TokenizedCaption::parse(t).ok())
        .collect();
    let stemmer = match a.stemmer {
        StemmerArg::Porter => Stemmer::Porter,
        StemmerArg::None => Stemmer::None,
    };
    let dist = ngram_distribution(&captions, a.n, a.top_k, stemmer)?;
    match a.output.format {
        Format::Json => emit_json(a.output.out.as_deref(), &dist),
        Format::Csv => emit(
            a.output.out.as_deref(),
            &csv_table(
                ["ngram", "count"],
                dist.iter().map(|d| [d.ngram.clone(), d.count.to_string()]),
            )?,
        ),
    }
}

fn read_keys(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

fn overlap(a: OverlapArgs) -> Result<()> {
    if a.against.is_empty() && a.keys.is_empty() {
        return Err(Error::InvalidArgument(
            "give at least one --against or --keys".into(),
        ));
    }
    let left = group_by_dataset(&load_manifest(&a.manifest)?);
    let mut rows: Vec<OverlapReport> = Vec::new();
    for path in &a.against {
        let right = group_by_dataset(&load_manifest(path)?);
        for records_a in left.values() {
            for records_b in right.values() {
                rows.push(overlap_audit(records_a, OverlapSide::Records(records_b))?);
            }
        }
    }
    for spec in &a.keys {
        let (tag, path) = spec.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("--keys expects DATASET=PATH, got `{spec}`"))
        })?;
        let dataset: DatasetTag = tag.parse()?;
        let keys = read_keys(Path::new(path))?;
        for records_a in left.values() {
            rows.push(overlap_audit(
                records_a,
                OverlapSide::Keys {
                    dataset: &dataset,
                    keys: &keys,
                },
            )?);
        }
    }
    match a.output.format {
        Format::Json => emit_json(a.output.out.as_deref(), &rows),
        Format::Csv => emit(
            a.output.out.as_deref(),
            &csv_table(
                [
                    "dataset_a",
                    "dataset_b",
                    "size_a",
                    "matched_a",
                    "overlap_pct",
                ],
                rows.iter().map(|r| {
                    [
                        r.dataset_a.to_string(),
                        r.dataset_b.to_string(),
                        r.size_a.to_string(),
                        r.matched_a.to_string(),
                        format!("{:.1}", r.overlap_pct),
                    ]
                }),
            )?,
        ),
    }
}

fn filter_wc(a: FilterWcArgs) -> Result<()> {
    let records = load_manifest(&a.manifest)?;
    let mut excluded: HashSet<String> = HashSet::new();
    for path in &a.exclude_keys {
        excluded.extend(read_keys(path)?);
    }
    for path in &a.exclude_manifest {
        excluded.extend(
            load_manifest(path)?
                .into_iter()
                .filter_map(|r| r.source_key),
        );
    }
    let kept = filter_wavcaps(&records, a.max_duration, &excluded);
    write_manifest(&a.out, &kept)?;
    let too_long = records
        .iter()
        .filter(|r| r.duration_sec > a.max_duration)
        .count();
    let summary = serde_json::json!({
        "input": records.len(),
        "kept": kept.len(),
        "removed_duration": too_long,
        "removed_key": records.len() - kept.len() - too_long,
    });
    emit(None, &format!("{summary}\n"))?;
    Ok(())
}

fn sample_epoch(a: SampleEpochArgs) -> Result<()> {
    let pool = group_by_dataset(&load_manifest(&a.manifest)?);
    let plan = balanced_epoch(&a.target, &pool, a.seed)?;
    match a.output.format {
        Format::Json => emit_json(
            a.output.out.as_deref(),
            &serde_json::json!({
                "target_dataset": plan.target_dataset,
                "seed": plan.seed,
                "size": plan.entries.len(),
                "entries": plan.entries,
            }),
        ),
        Format::Csv => emit(
            a.output.out.as_deref(),
            &csv_table(
                ["dataset", "subset", "id"],
                plan.entries
                    .iter()
                    .map(|e| [e.dataset.to_string(), e.subset.clone(), e.id.clone()]),
            )?,
        ),
    }
}

fn eval(a: EvalArgs) -> Result<()> {
    let items = eval_items(&a.candidates, &a.references, a.spice_sidecar.as_deref())?;
    let evaluator = fense_evaluator(&a.fense)?;
    let result = evaluate(&items, evaluator.as_ref())?;
    let text = match a.output.format {
        Format::Json => result.to_json()?,
        Format::Csv => result.to_csv()?,
    };
    emit(a.output.out.as_deref(), &text)
}

fn crossref(a: CrossrefArgs) -> Result<()> {
    let records = load_manifest(&a.references)?;
    let items: Vec<ReferenceSet> = records
        .iter()
        .map(|r| ReferenceSet {
            id: r.id.clone(),
            captions: r
                .captions
                .iter()
                .filter_map(|c| TokenizedCaption::parse(c).ok())
                .collect(),
        })
        .collect();
    let evaluator = fense_evaluator(&a.fense)?;
    let result = cross_reference(&items, a.repetitions, a.seed, evaluator.as_ref())?;
    let text = match a.output.format {
        Format::Json => result.to_json()?,
        Format::Csv => result.to_csv()?,
    };
    emit(a.output.out.as_deref(), &text)
}

#[derive(Serialize)]
struct FenseRow {
    id: String,
    sbert_sim: f64,
    fense: f64,
    rules: Vec<&'static str>,
}

fn fense_cmd(a: FenseArgs) -> Result<()> {
    let items = eval_items(&a.candidates, &a.references, None)?;
    let store = SentenceEmbeddingStore::load(&a.embeddings)?;
    let lex = lexicons(a.lexicon_dir.as_deref())?;
    let mut rows = Vec::with_capacity(items.len());
    for item in &items {
        let cand = store.require_caption(&item.candidate.original)?;
        let refs = item
            .references
            .iter()
            .map(|r| store.require_caption(&r.original))
            .collect::<Result<Vec<_>>>()?;
        let sim = sbert_sim(cand, &refs, a.aggregation)?;
        let verdict = detect_fluency_errors(&item.candidate, &lex);
        rows.push(FenseRow {
            id: item.id.clone(),
            sbert_sim: sim,
            fense: fense(sim, &verdict),
            rules: verdict.triggered_rules.iter().map(|r| r.name()).collect(),
        });
    }
    let n = rows.len().max(1) as f64;
    let mean_fense = rows.iter().map(|r| r.fense).sum::<f64>() / n;
    let mean_sim = rows.iter().map(|r| r.sbert_sim).sum::<f64>() / n;
    let error_rate = rows.iter().filter(|r| !r.rules.is_empty()).count() as f64 / n;
    match a.output.format {
        Format::Json => emit_json(
            a.output.out.as_deref(),
            &serde_json::json!({
                "corpus": {"fense": mean_fense, "sbert_sim": mean_sim, "error_rate": error_rate},
                "items": rows,
            }),
        ),
        Format::Csv => emit(
            a.output.out.as_deref(),
            &csv_table(
                ["id", "sbert_sim", "fense", "rules"],
                rows.iter().map(|r| {
                    [
                        r.id.clone(),
                        sig6(r.sbert_sim),
                        sig6(r.fense),
                        r.rules.join(";"),
                    ]
                }),
            )?,
        ),
    }
}

fn decode_config(
    model: &ToyModel,
    flags: &DecodeFlags,
    task: Option<DatasetTag>,
) -> Result<DecodeConfig> {
    let words = match &flags.stopwords {
        Some(path) => load_stopwords(path)?,
        None => default_stopwords(),
    };
    let cfg = DecodeConfig {
        beam_size: flags.beam_size,
        min_len: flags.min_len,
        max_len: flags.max_len,
        stop_words: model.vocab.ids_of(&words),
        task,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn decode_inputs(
    manifest: &Path,
    subset: Option<&str>,
) -> Result<(ToyCorpus, Vec<ClipRecord>, Vec<AudioContext>)> {
    let corpus = ToyCorpus::load(manifest)?;
    let records: Vec<ClipRecord> = corpus
        .records
        .iter()
        .filter(|r| subset.is_none_or(|s| r.subset == s))
        .cloned()
        .collect();
    let contexts = records
        .iter()
        .map(|r| AudioContext::new(corpus.features(r)?.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok((corpus, records, contexts))
}

fn jsonl<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut text = String::new();
    for row in rows {
        text.push_str(&serde_json::to_string(row)?);
        text.push('\n');
    }
    Ok(text)
}

fn decode(a: DecodeArgs) -> Result<()> {
    let model = load_checkpoint(&a.checkpoint)?;
    let cfg = decode_config(&model, &a.decode, a.task.clone())?;
    let (_, records, contexts) = decode_inputs(&a.manifest, a.decode.subset.as_deref())?;
    let refs: Vec<&AudioContext> = contexts.iter().collect();
    let outputs = beam_search(&model, &refs, &model.vocab, &cfg)?;
    let task = a
        .task
        .as_ref()
        .map_or("none".to_string(), |t| t.name().to_string());
    let rows = records
        .iter()
        .zip(outputs)
        .map(|(r, d)| {
            Ok(DecodeRecord {
                id: r.id.clone(),
                task: task.clone(),
                caption: model.vocab.decode(&d.token_ids)?.join(" "),
                logprob: d.logprob,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    emit(a.out.as_deref(), &jsonl(&rows)?)
}

#[derive(Debug, Serialize)]
struct TeStatsRow {
    task: String,
    cider_d: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fense: Option<f64>,
    n_words: usize,
    mean_sent_len: f64,
}

fn te_compare_cmd(a: TeCompareArgs) -> Result<()> {
    let model = load_checkpoint(&a.checkpoint)?;
    let cfg = decode_config(&model, &a.decode, None)?;
    let (_, records, contexts) = decode_inputs(&a.manifest, a.decode.subset.as_deref())?;
    let refs: Vec<&AudioContext> = contexts.iter().collect();
    let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
    let cmp = te_compare(
        &model,
        &ids,
        &refs,
        &model.vocab,
        &cfg,
        &a.task_a,
        &a.task_b,
    )?;

    let evaluator = fense_evaluator(&a.fense)?;
    let references: Vec<Vec<TokenizedCaption>> = records
        .iter()
        .map(|r| {
            r.captions
                .iter()
                .filter_map(|c| TokenizedCaption::parse(c).ok())
                .collect()
        })
        .collect();
    let mut table = Vec::new();
    for (side, captions) in [(&cmp.a, cmp.captions_a()), (&cmp.b, cmp.captions_b())] {
        let items: Vec<EvalItem> = ids
            .iter()
            .zip(captions)
            .zip(&references)
            .map(|((id, c), r)| EvalItem::new(id.clone(), c, r.clone()))
            .collect();
        let result = evaluate(&items, evaluator.as_ref())?;
        table.push(TeStatsRow {
            task: side.task.clone(),
            cider_d: result.cider_d,
            fense: result.fense,
            n_words: side.stats.n_unique_words,
            mean_sent_len: side.stats.mean_sentence_length,
        });
    }
    let pairs: Vec<serde_json::Value> = cmp
        .pairs
        .iter()
        .map(|p| {
            serde_json::json!({
                "id": p.id,
                "task_a": cmp.a.task, "caption_a": p.caption_a, "logprob_a": p.logprob_a,
                "task_b": cmp.b.task, "caption_b": p.caption_b, "logprob_b": p.logprob_b,
            })
        })
        .collect();
    emit(a.out.as_deref(), &jsonl(&pairs)?)?;

    let cross = cmp.cross_cider_d()?;
    match a.format {
        Format::Json => emit_json(
            a.stats.as_deref(),
            &serde_json::json!({"tasks": table, "cross_cider_d": cross}),
        ),
        Format::Csv => {
            let with_fense = table.iter().any(|r| r.fense.is_some());
            let mut header = vec!["task", "cider_d"];
            if with_fense {
                header.push("fense");
            }
            header.extend(["n_words", "mean_sent_len"]);
            let rows = table.iter().map(|r| {
                let mut row = vec![r.task.clone(), sig6(r.cider_d)];
                if with_fense {
                    row.push(sig6(r.fense.unwrap_or(0.0)));
                }
                row.extend([r.n_words.to_string(), sig6(r.mean_sent_len)]);
                row
            });
            emit(a.stats.as_deref(), &csv_table(header, rows)?)
        }
    }
}

fn train_toy_cmd(a: TrainToyArgs) -> Result<()> {
    let cfg = match (&a.config, a.preset) {
        (Some(path), _) => TrainConfig::load(path)?,
        (None, PresetArg::Ac) => TrainConfig::ac(),
        (None, PresetArg::Cl) => TrainConfig::cl(),
        (None, PresetArg::Toy) => toy_train_config(30),
    };
    emit(None, &format!("# resolved config\n{}", cfg.to_toml()))?;
    let corpus = ToyCorpus::load(&a.manifest)?;
    let opts = ToyOptions {
        d_model: a.d_model,
        tasks: a.tasks.clone(),
        balance: a.balance.clone(),
        ..Default::default()
    };
    let evaluator = match &a.embeddings {
        Some(path) => Some(FenseEvaluator::new(
            SentenceEmbeddingStore::load(path)?,
            lexicons(a.lexicon_dir.as_deref())?,
        )),
        None => None,
    };
    let outcome = train_toy(&corpus, &cfg, &opts, a.seed, evaluator.as_ref())?;
    save_checkpoint(&a.out, &outcome.model)?;
    if let Some(path) = &a.trace {
        match a.format {
            Format::Json => emit_json(Some(path), &outcome.trace)?,
            Format::Csv => emit(
                Some(path),
                &csv_table(
                    ["epoch", "lr", "train_loss", "val_loss", "val_fense"],
                    outcome.trace.iter().map(|m| {
                        let opt = |v: Option<f64>| v.map(sig6).unwrap_or_default();
                        [
                            m.epoch.to_string(),
                            sig6(m.lr),
                            sig6(m.train_loss),
                            opt(m.val_loss),
                            opt(m.val_fense),
                        ]
                    }),
                )?,
            )?,
        }
    }
    let first = outcome.trace.first().map_or(f64::NAN, |m| m.train_loss);
    let last = outcome.trace.last().map_or(f64::NAN, |m| m.train_loss);
    let summary = serde_json::json!({
        "epochs": outcome.trace.len(),
        "best_epoch": outcome.best_epoch,
        "selection": outcome.selection,
        "first_train_loss": rounded_json(&first)?,
        "last_train_loss": rounded_json(&last)?,
        "missing_embeddings": outcome.missing_embeddings,
        "checkpoint": a.out,
    });
    emit(None, &format!("{summary}\n"))?;
    Ok(())
}

fn gen_synth(a: GenSynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        train_per_style: a.train_per_style,
        val_per_style: a.val_per_style,
        frames: a.frames,
        d_audio: a.d_audio,
        noise: a.noise,
        seed: a.seed,
    };
    let corpus = generate_two_style(&cfg)?;
    let manifest = corpus.save(&a.out)?;
    let captions: BTreeMap<&str, ()> = corpus
        .records
        .iter()
        .flat_map(|r| r.captions.iter().map(|c| (c.as_str(), ())))
        .collect();
    let store = bag_of_words_store(captions.keys().copied(), a.embedding_dim)?;
    let store_path = a.out.join("captions.semb");
    store.save(&store_path)?;
    let summary = serde_json::json!({
        "manifest": manifest,
        "clips": corpus.records.len(),
        "embeddings": store_path,
        "captions": store.len(),
    });
    emit(None, &format!("{summary}\n"))?;
    Ok(())
}

/// Build the clap command, e.g. for help rendering.
pub fn command() -> clap::Command {
    <Cli as clap::CommandFactory>::command()
}
