//! The whole data pipeline end to end on an in-memory fixture: ingest,
//! tokenizer training, augmentation, packing with masking, reference LM
//! training, and minimal-pair evaluation.
//!
//! ```text
//! cargo run --example full_pipeline
//! ```

use minicorpus::atf::augment_corpus;
use minicorpus::atf::SentimentLexicon;
use minicorpus::bpe::{train_bpe, SpecialRole, SpecialTokens};
use minicorpus::config::PipelineConfig;
use minicorpus::eval::{evaluate_grouped, BenchmarkReport, MinimalPair, PllScorer};
use minicorpus::ingest::{split_sentences, Document};
use minicorpus::ngram::train_ngram;
use minicorpus::pack::{apply_masking, concat_and_pack, MaskConfig, IGNORE_LABEL};
use minicorpus::seeding::derive_seed;

fn main() -> anyhow::Result<()> {
    let mut config = PipelineConfig::default();
    config.vocab_size = 7 + 256 + 60; // desk-scale vocabulary
    config.seq_len = 32;

    // 1. Ingest: documents -> sentences.
    let raw = [
        "the river ran past the mill. children played along the bank.",
        "Ada Lovelace (born 10 December 1815) was a writer. she wrote on machines.",
        "Jo Vik (born 1990) is a chemist from Norway. the lab was terrific.",
        "Neon was discovered in 1898. the discovery was beautiful.",
        "the mill closed at dusk. the water kept moving. it was not good for trade.",
    ];
    let docs: Vec<Document> = raw
        .iter()
        .enumerate()
        .map(|(i, text)| Document {
            doc_id: format!("demo:{i}"),
            source: "demo".into(),
            text: text.to_string(),
        })
        .collect();
    let sentences: Vec<_> = docs.iter().flat_map(split_sentences).collect();
    println!("ingest: {} documents -> {} sentences", docs.len(), sentences.len());

    // 2. Augment: QA pairs and sentiment tags, appended after natural text.
    let augmented = augment_corpus(
        sentences.iter(),
        &SentimentLexicon::default(),
        config.sentiment_cap,
        config.seed,
        &SpecialTokens::default(),
    );
    println!(
        "augment: {} qa pairs, {} sentiment records",
        augmented.qa_count,
        augmented.records.len() - augmented.qa_count
    );

    // 3. Tokenizer over the sentence stream.
    let tokenizer = train_bpe(
        sentences.iter().map(|s| &s.text),
        config.vocab_size,
        SpecialTokens::default(),
    )?;
    println!("tokenizer: {} entries", tokenizer.vocab_size());

    // 4. Pack sentences plus augmentation records, then mask.
    let units = sentences
        .iter()
        .map(|s| (format!("{}#{}", s.doc_ref, s.index), tokenizer.encode(&s.text)))
        .chain(
            augmented
                .records
                .iter()
                .enumerate()
                .map(|(i, r)| (format!("atf#{i}"), tokenizer.encode(&r.text))),
        );
    let seqs = concat_and_pack(
        units,
        config.seq_len,
        tokenizer.special_id(SpecialRole::SepDoc),
        tokenizer.special_id(SpecialRole::Pad),
    )?;
    let cfg = MaskConfig {
        rate: config.mask_rate,
        scheme: config.mask_scheme,
        seed: derive_seed(config.seed, "pack/mask"),
        exempt_specials: config.exempt_specials,
        mask_id: tokenizer.special_id(SpecialRole::Mask),
        num_specials: tokenizer.specials().len() as u32,
        vocab_size: tokenizer.vocab_size() as u32,
    };
    let masked: usize = seqs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            apply_masking(s, &cfg, i as u64)
                .labels
                .iter()
                .filter(|&&l| l != IGNORE_LABEL)
                .count()
        })
        .sum();
    println!(
        "pack: {} windows of {}, {} masked positions at rate {}",
        seqs.len(),
        config.seq_len,
        masked,
        config.mask_rate
    );

    // 5. Reference LM and zero-shot evaluation.
    let train_seqs: Vec<Vec<u32>> = sentences.iter().map(|s| tokenizer.encode(&s.text)).collect();
    let lm = train_ngram(
        &train_seqs,
        config.ngram_order,
        config.ngram_alpha,
        tokenizer.vocab_size() as u32,
    )?;
    let scorer = PllScorer {
        model: &lm,
        tokenizer: &tokenizer,
    };
    let pairs = vec![
        MinimalPair {
            uid: "p0".into(),
            phenomenon: "word_order".into(),
            sentence_good: "the river ran past the mill".into(),
            sentence_bad: "mill the past ran river the".into(),
        },
        MinimalPair {
            uid: "p1".into(),
            phenomenon: "word_order".into(),
            sentence_good: "the mill closed at dusk".into(),
            sentence_bad: "dusk at closed mill the".into(),
        },
    ];
    let bench = BenchmarkReport::from_tasks(evaluate_grouped(&scorer, &pairs)?)?;
    print!("\n{}", bench.to_table());
    Ok(())
}
