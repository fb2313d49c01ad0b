//! Dataset statistics and the most frequent stemmed trigrams.

use capkit::corpus::{corpus_stats, ngram_distribution, ClipRecord, DatasetTag, Stemmer};

fn main() -> capkit::Result<()> {
    let records = vec![
        ClipRecord::new("c1", DatasetTag::Cl, "dev")
            .with_duration(21.5)
            .with_captions([
                "A dog is barking loudly while cars pass by.",
                "Dogs bark as traffic passes in the distance",
            ]),
        ClipRecord::new("c2", DatasetTag::Cl, "dev")
            .with_duration(17.0)
            .with_captions([
                "Rain is falling on a metal roof",
                "Heavy rain falls on the roof",
            ]),
    ];
    let stats = corpus_stats(&records);
    println!(
        "{} clips, {:.4} h, {} captions, vocabulary {}",
        stats.n_audio, stats.total_hours, stats.n_captions, stats.vocab_size
    );

    let captions: Vec<_> = records
        .iter()
        .flat_map(|r| &r.captions)
        .filter_map(|c| capkit::corpus::TokenizedCaption::parse(c).ok())
        .collect();
    for row in ngram_distribution(&captions, 2, Some(5), Stemmer::Porter)? {
        println!("{:>3}  {}", row.count, row.ngram);
    }
    Ok(())
}
