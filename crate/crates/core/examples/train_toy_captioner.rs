//! Train the toy captioner on the synthetic two-style corpus and compare the
//! AC and CL task embeddings on the validation clips.

use capkit::corpus::DatasetTag;
use capkit::decode::{default_stopwords, te_compare, DecodeConfig};
use capkit::toymodel::{
    generate_two_style, load_checkpoint, save_checkpoint, toy_train_config, train_toy,
    AudioContext, SynthConfig, ToyOptions,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_two_style(&SynthConfig::default())?;
    let cfg = toy_train_config(30);
    let outcome = train_toy(&corpus, &cfg, &ToyOptions::default(), 1, None)?;
    for m in outcome.trace.iter().step_by(5) {
        println!(
            "epoch {:>2}  lr {:.4}  train {:.3}  val {:.3}",
            m.epoch,
            m.lr,
            m.train_loss,
            m.val_loss.unwrap_or(f64::NAN)
        );
    }
    println!("selected epoch {}", outcome.best_epoch);

    let dir = std::env::temp_dir().join("capkit-toy-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("toy.ckpt");
    save_checkpoint(&path, &outcome.model)?;
    let model = load_checkpoint(&path)?;

    let val = corpus.subset("val");
    let ids: Vec<String> = val.iter().map(|r| r.id.clone()).collect();
    let contexts = val
        .iter()
        .map(|r| AudioContext::new(corpus.features(r)?.clone()))
        .collect::<capkit::Result<Vec<_>>>()?;
    let refs: Vec<&AudioContext> = contexts.iter().collect();
    let decode = DecodeConfig {
        beam_size: cfg.beam_size,
        min_len: cfg.min_len,
        max_len: cfg.max_len,
        stop_words: model.vocab.ids_of(&default_stopwords()),
        task: None,
    };
    let te = te_compare(
        &model,
        &ids,
        &refs,
        &model.vocab,
        &decode,
        &DatasetTag::Ac,
        &DatasetTag::Cl,
    )?;
    for pair in te.pairs.iter().take(3) {
        println!(
            "{}\n  AC: {}\n  CL: {}",
            pair.id, pair.caption_a, pair.caption_b
        );
    }
    for side in [&te.a, &te.b] {
        println!(
            "{}: #words {}  mean length {:.1}",
            side.task, side.stats.n_unique_words, side.stats.mean_sentence_length
        );
    }
    println!("cross CIDEr-D {:.3}", te.cross_cider_d()?);
    Ok(())
}
