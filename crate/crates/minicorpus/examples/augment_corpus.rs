//! Mine question-answer pairs and sentiment-tagged sentences from a tiny
//! corpus with automatic task formation.
//!
//! ```text
//! cargo run --example augment_corpus
//! ```

use minicorpus::atf::{augment_corpus, classify_sentiment, SentimentClass, SentimentLexicon};
use minicorpus::bpe::SpecialTokens;
use minicorpus::ingest::Sentence;

fn main() {
    let texts = [
        "Ada Lovelace (born 10 December 1815) was a writer",
        "Jo Vik (born 1 May 1990) is a chemist from Norway",
        "Neon was discovered in 1898",
        "Rome was founded in 753",
        "The Eiffel Tower was named after Gustave Eiffel",
        "that movie was terrific",
        "the service was horrible",
        "it was not good at all",
        "great acting but a terrible script",
        "the sky is blue today",
    ];
    let sentences: Vec<Sentence> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| Sentence {
            doc_ref: format!("demo:{i}"),
            index: 0,
            text: t.to_string(),
        })
        .collect();

    let lexicon = SentimentLexicon::default();
    println!("sentence classifications:");
    for s in &sentences {
        let class = classify_sentiment(s, &lexicon);
        if class != SentimentClass::None {
            println!("  {class:?}: {:?}", s.text);
        }
    }

    let out = augment_corpus(sentences.iter(), &lexicon, 2500, 42, &SpecialTokens::default());
    println!(
        "\n{} qa pairs, {} positive eligible, {} negative eligible",
        out.qa_count, out.positive_eligible, out.negative_eligible
    );
    println!("\naugmentation records (the text enters the packing pipeline):");
    for rec in &out.records {
        println!("  [{:?}] {}", rec.kind, rec.text);
    }
}
