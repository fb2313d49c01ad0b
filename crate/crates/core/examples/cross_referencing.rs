//! Human top-line: every reference takes a turn as the candidate.

use capkit::corpus::TokenizedCaption;
use capkit::metrics::{cross_reference, ReferenceSet};

fn set(id: &str, captions: &[&str]) -> ReferenceSet {
    ReferenceSet {
        id: id.into(),
        captions: captions
            .iter()
            .map(|c| TokenizedCaption::parse(c).expect("non-empty"))
            .collect(),
    }
}

fn main() -> capkit::Result<()> {
    let items = vec![
        set(
            "clip1",
            &[
                "a dog barks repeatedly",
                "a dog is barking",
                "a small dog barks at someone",
                "barking from a dog nearby",
                "a dog barks while people talk",
            ],
        ),
        set(
            "clip2",
            &[
                "water runs from a tap",
                "a faucet is running",
                "water flows into a sink",
                "someone fills a glass with water",
                "running water splashes",
            ],
        ),
    ];
    let result = cross_reference(&items, 5, 7, None)?;
    println!("CIDEr-D top-line over 5 repetitions: {:.3}", result.cider_d);
    println!(
        "#words {}  mean length {:.2}",
        result.n_unique_words, result.mean_sentence_length
    );
    Ok(())
}
