//! Constrained beam search over a hand-written bigram scorer.

use capkit::decode::{beam_search, greedy_decode, DecodeConfig, Scorer, Vocabulary};

/// Scores the next word from the previous one only.
struct Bigram {
    vocab: Vocabulary,
}

impl Scorer for Bigram {
    type Context = ();

    fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn next_logprobs(&self, _: &(), prefix: &[usize]) -> capkit::Result<Vec<f64>> {
        let last = self.vocab.token(*prefix.last().expect("start token"))?;
        let prefer = |w: &str| -> f64 {
            match (last, w) {
                // tempting first word with weak continuations
                ("<bos>", "the") => 3.2,
                ("<bos>", "a") | ("a", "dog") | ("dog", "barks") | ("barks", "loudly") => 3.0,
                ("barks", "and") | ("and", "a") => 2.0,
                ("loudly", "<eos>") => 2.5,
                (_, "dog") => 1.0,
                _ => 0.0,
            }
        };
        let logits: Vec<f64> = self.vocab.tokens().iter().map(|t| prefer(t)).collect();
        Ok(capkit::trainkit::log_softmax(&logits))
    }
}

fn main() -> capkit::Result<()> {
    let vocab = Vocabulary::build(["a", "the", "dog", "barks", "loudly", "and"], &[])?;
    let scorer = Bigram {
        vocab: vocab.clone(),
    };
    let cfg = DecodeConfig {
        beam_size: 3,
        min_len: 3,
        max_len: 8,
        // "a" may repeat; "dog" and "barks" may not
        stop_words: vocab.ids_of(&["a".to_string(), "and".to_string()]),
        task: None,
    };
    let beam = beam_search(&scorer, &[&()], &vocab, &cfg)?.remove(0);
    let greedy = greedy_decode(&scorer, &(), &vocab, &cfg)?;
    for (name, d) in [("beam", beam), ("greedy", greedy)] {
        println!(
            "{name:<6} {:<28} logprob {:.3}  per token {:.3}",
            vocab.decode(&d.token_ids)?.join(" "),
            d.logprob,
            d.score
        );
    }
    Ok(())
}
