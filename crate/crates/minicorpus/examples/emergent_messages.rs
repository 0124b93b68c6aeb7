//! Validate, split, and render an emergent-language message corpus.
//!
//! ```text
//! cargo run --example emergent_messages
//! ```

use minicorpus::omg::{
    split_messages, synthesize_messages, validate_message, DEFAULT_MAX_LEN, DEFAULT_TRAIN_FRAC,
    DEFAULT_VOCAB_SIZE,
};

fn main() -> anyhow::Result<()> {
    // A referential-game message: content symbols then the terminator 0.
    let raw = [1019, 3876, 601, 2194, 3360, 3360, 3360, 3360, 3360, 3360, 3360, 3360, 3360, 3360, 0];
    let msg = validate_message(&raw, DEFAULT_VOCAB_SIZE, DEFAULT_MAX_LEN)?;
    println!("valid message: {}", msg.render_for_lm());

    for (bad, why) in [
        (vec![5000u32], "symbol outside the vocabulary"),
        (vec![1u32; 16], "longer than the maximum"),
    ] {
        println!(
            "{why}: {}",
            validate_message(&bad, DEFAULT_VOCAB_SIZE, DEFAULT_MAX_LEN).unwrap_err()
        );
    }

    // Synthesize a corpus (Zipfian symbols) and split it for training.
    let n = 100_000;
    let messages = synthesize_messages(n, DEFAULT_VOCAB_SIZE, DEFAULT_MAX_LEN, 7);
    let (train, dev) = split_messages(messages, DEFAULT_TRAIN_FRAC, 7)?;
    println!("\nsynthesized {n} messages -> {} train / {} dev", train.len(), dev.len());
    println!("first training lines:");
    for msg in train.iter().take(5) {
        println!("  {}", msg.render_for_lm());
    }

    // The rendered lines feed the ordinary ingest -> tokenize -> pack
    // pipeline as a pre-pre-training corpus.
    Ok(())
}
