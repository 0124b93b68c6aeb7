//! Validate, sample, and emit a bracketed (constituency-marked) corpus for
//! pre-pre-training.
//!
//! ```text
//! cargo run --example bracketed_corpus
//! ```

use minicorpus::brak::{emit_brak_corpus, select_brak_subset, strip_brackets, BracketedSentence};
use minicorpus::ingest::{normalize_for_parsing, Sentence};

fn main() -> anyhow::Result<()> {
    // Bracketings normally come from an external parser's output file.
    let line = "[ [ [ [ they are ] placed ] into ] [ [ one character ] fonts ] ]";
    let parsed = BracketedSentence::parse(line)?;
    println!("parsed: {line}");
    println!("  surface: {:?}", strip_brackets(&parsed));
    println!("  constituents: {}", parsed.constituents());

    // Malformed lines are rejected with positions.
    for bad in ["[ [ x ]", "x ] y", "[ a [ ] ]"] {
        println!("  {bad:?} -> {}", BracketedSentence::parse(bad).unwrap_err());
    }

    // A right-branching bracketer is bundled for fixture generation.
    let raw = [
        "They are placed into one character fonts.",
        "The cat sat, quietly watching!",
        "Dogs bark.",
        "Short one.",
        "A very long sentence with many words inside it.",
        "Tiny.",
    ];
    let parses: Vec<BracketedSentence> = raw
        .iter()
        .enumerate()
        .filter_map(|(i, text)| {
            let s = Sentence {
                doc_ref: format!("d{i}"),
                index: 0,
                text: text.to_string(),
            };
            BracketedSentence::right_branching(&normalize_for_parsing(&s).tokens)
        })
        .collect();

    // Keep sentences of at least three words, sample three of them.
    let selection = select_brak_subset(parses, 3, 3, 42);
    println!(
        "\nselected {} of {} eligible sentences:",
        selection.sentences.len(),
        selection.eligible
    );
    let mut buf = Vec::new();
    emit_brak_corpus(&selection.sentences, &mut buf)?;
    print!("{}", String::from_utf8(buf)?);
    Ok(())
}
