//! Train a byte-level BPE tokenizer and round-trip some text.
//!
//! ```text
//! cargo run --example train_tokenizer
//! ```

use minicorpus::bpe::{train_bpe, SpecialTokens};

fn main() -> anyhow::Result<()> {
    let corpus = [
        "the cat sat on the mat",
        "the dog sat on the rug",
        "a cat and a dog met on the mat",
        "cats nap and dogs dig all day",
        "the quick brown fox jumps over the lazy dog",
    ];

    // 7 specials + 256 byte symbols + 40 learned merges.
    let vocab_size = 7 + 256 + 40;
    let model = train_bpe(corpus, vocab_size, SpecialTokens::default())?;
    println!("vocabulary: {} entries", model.vocab_size());

    println!("\nfirst merges, in training order:");
    for rule in model.merges().iter().take(10) {
        println!(
            "  {:?} + {:?} -> {:?}",
            model.token_display(rule.left),
            model.token_display(rule.right),
            model.token_display(rule.result),
        );
    }

    let text = "the quick cat naps on the rug";
    let ids = model.encode(text);
    let tokens: Vec<String> = ids.iter().map(|&id| model.token_display(id)).collect();
    println!("\nencode {text:?}");
    println!("  ids:    {ids:?}");
    println!("  tokens: {tokens:?}");
    assert_eq!(model.decode(&ids)?, text);
    println!("  decode round-trips exactly");

    // Special literals in text map to their reserved ids.
    let rendered = "where is the cat? [SEP] on the mat";
    let ids = model.encode(rendered);
    println!("\nencode {rendered:?}");
    println!("  contains the SEP_QA id: {}", ids.contains(&4));
    assert_eq!(model.decode(&ids)?, rendered);

    // The model file is plain text and reloads identically.
    let dir = std::env::temp_dir();
    let path = dir.join("minicorpus_example_tok.model");
    model.save(&path)?;
    let reloaded = minicorpus::bpe::TokenizerModel::load(&path)?;
    assert_eq!(reloaded.encode(text), model.encode(text));
    println!("\nsaved and reloaded from {}", path.display());
    Ok(())
}
