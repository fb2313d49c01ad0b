//! Corpus CIDEr-D and SPIDEr with externally computed SPICE.

use capkit::corpus::TokenizedCaption;
use capkit::metrics::{evaluate, EvalItem};

fn cap(s: &str) -> TokenizedCaption {
    TokenizedCaption::parse(s).expect("non-empty caption")
}

fn main() -> capkit::Result<()> {
    let mut items = vec![
        EvalItem::new(
            "clip1",
            cap("a dog barks while a man talks"),
            vec![
                cap("a dog is barking and a man speaks"),
                cap("a man talks as a dog barks"),
            ],
        ),
        EvalItem::new(
            "clip2",
            cap("rain falls on a roof"),
            vec![
                cap("heavy rain falls on a tin roof"),
                cap("rain is hitting the roof"),
            ],
        ),
    ];
    // SPICE needs a Java toolchain, so it comes in as a number per item.
    items[0].spice = Some(0.21);
    items[1].spice = Some(0.18);

    let result = evaluate(&items, None)?;
    for item in &result.items {
        println!(
            "{}: CIDEr-D {:.3}  SPIDEr {:.3}",
            item.id,
            item.cider_d,
            item.spider.unwrap_or_default()
        );
    }
    println!("{}", result.to_csv()?);
    Ok(())
}
