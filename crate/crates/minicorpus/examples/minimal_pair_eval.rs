//! Zero-shot minimal-pair evaluation with the built-in reference scorer.
//!
//! ```text
//! cargo run --example minimal_pair_eval
//! ```

use minicorpus::bpe::{train_bpe, SpecialTokens};
use minicorpus::eval::{evaluate_grouped, BenchmarkReport, MinimalPair, PllScorer};
use minicorpus::ngram::train_ngram;

fn main() -> anyhow::Result<()> {
    // Train the scorer on well-formed text only.
    let grammar: Vec<String> = ["the cat sees a dog", "a dog sees the bird", "the bird sees a cat"]
        .iter()
        .flat_map(|t| std::iter::repeat(t.to_string()).take(30))
        .collect();
    let tokenizer = train_bpe(grammar.iter(), 7 + 256 + 15, SpecialTokens::default())?;
    let sequences: Vec<Vec<u32>> = grammar.iter().map(|s| tokenizer.encode(s)).collect();
    let model = train_ngram(&sequences, 3, 0.1, tokenizer.vocab_size() as u32)?;
    let scorer = PllScorer {
        model: &model,
        tokenizer: &tokenizer,
    };

    let pairs = vec![
        MinimalPair {
            uid: "wo1".into(),
            phenomenon: "word_order".into(),
            sentence_good: "the cat sees a dog".into(),
            sentence_bad: "dog a sees cat the".into(),
        },
        MinimalPair {
            uid: "wo2".into(),
            phenomenon: "word_order".into(),
            sentence_good: "a dog sees the bird".into(),
            sentence_bad: "bird the sees dog a".into(),
        },
        MinimalPair {
            uid: "det1".into(),
            phenomenon: "determiners".into(),
            sentence_good: "the bird sees a cat".into(),
            sentence_bad: "bird sees cat".into(),
        },
    ];

    let reports = evaluate_grouped(&scorer, &pairs)?;
    let bench = BenchmarkReport::from_tasks(reports)?;
    print!("{}", bench.to_table());
    println!("\nreport JSON:\n{}", serde_json::to_string_pretty(&bench)?);
    Ok(())
}
