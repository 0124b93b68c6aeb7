//! Pipeline command implementations.
//!
//! Each function backs one CLI subcommand 1:1: it validates its inputs,
//! runs the corresponding module operations, writes the outputs, and drops a
//! provenance manifest next to the first output (or at the overridden
//! manifest path). Argument and configuration problems surface as
//! [`UsageError`] so the binary can exit with a distinct status code.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::atf::{augment_corpus, AugmentationRecord, SentimentLexicon};
use crate::bpe::{train_bpe, SpecialRole, SpecialTokens, TokenizerModel};
use crate::brak::{emit_brak_corpus, select_brak_subset, BracketedSentence};
use crate::config::PipelineConfig;
use crate::eval::{
    evaluate_grouped, evaluate_grouped_with_scores, read_pairs, read_scores, BenchmarkReport,
    PllScorer,
};
use crate::ingest::{
    load_corpus, normalize_for_parsing, split_sentences, CorporaManifest, DocDelimiter, Sentence,
};
use crate::manifest::RunManifest;
use crate::ngram::{train_ngram, NGramModel};
use crate::omg::{parse_message_line, split_messages, synthesize_messages, validate_message};
use crate::pack::{
    apply_masking, concat_and_pack, write_masked_files, write_packed_file, MaskConfig,
    RecordHeader,
};
use crate::seeding::derive_seed;

/// A problem with flags, inputs, or configuration; mapped to a distinct
/// exit code by the binary.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(message.into()))
}

/// Shared command context: the resolved config and the manifest override.
pub struct Ctx {
    pub config: PipelineConfig,
    pub manifest_path: Option<PathBuf>,
}

impl Ctx {
    pub fn new(config: PipelineConfig) -> Self {
        Ctx {
            config,
            manifest_path: None,
        }
    }

    fn write_manifest(&self, manifest: &RunManifest, anchor: &Path) -> Result<()> {
        let path = self
            .manifest_path
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}.manifest.json", anchor.display())));
        manifest
            .write(&path)
            .with_context(|| format!("writing manifest {}", path.display()))
    }
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if !path.is_file() {
        return Err(usage(format!("{what} {} does not exist", path.display())));
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sentences_jsonl(path: &Path) -> Result<Vec<Sentence>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading sentences {}", path.display()))?;
    let mut sentences = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let s: Sentence = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: bad sentence record", path.display(), lineno + 1))?;
        sentences.push(s);
    }
    Ok(sentences)
}

fn read_augmentation_jsonl(path: &Path) -> Result<Vec<AugmentationRecord>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading augmentation records {}", path.display()))?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: AugmentationRecord = serde_json::from_str(line).with_context(|| {
            format!("{}:{}: bad augmentation record", path.display(), lineno + 1)
        })?;
        records.push(r);
    }
    Ok(records)
}

/// `ingest`: corpora manifest -> sentence JSON lines.
pub fn cmd_ingest(ctx: &Ctx, corpora: &Path, out: &Path, per_line: bool) -> Result<()> {
    require_file(corpora, "corpora manifest")?;
    let manifest_file = CorporaManifest::load(corpora).map_err(|e| usage(e.to_string()))?;
    for (_, path) in manifest_file.entries() {
        require_file(path, "corpus file")?;
    }
    let delimiter = if per_line {
        DocDelimiter::Line
    } else {
        DocDelimiter::BlankLine
    };
    let docs = load_corpus(&manifest_file, delimiter)?;
    let mut sentences = Vec::new();
    for doc in &docs {
        sentences.extend(split_sentences(doc));
    }
    write_jsonl(out, &sentences)?;

    let mut manifest = RunManifest::new("ingest", &ctx.config);
    manifest.add_input(corpora)?;
    for (_, path) in manifest_file.entries() {
        manifest.add_input(path)?;
    }
    manifest.add_output(out)?;
    ctx.write_manifest(&manifest, out)?;
    println!(
        "ingest: {} documents -> {} sentences -> {}",
        docs.len(),
        sentences.len(),
        out.display()
    );
    Ok(())
}

/// `train-tokenizer`: sentence JSON lines (or raw text) -> BPE model file.
pub fn cmd_train_tokenizer(ctx: &Ctx, input: &Path, raw_text: bool, out: &Path) -> Result<()> {
    require_file(input, "tokenizer training input")?;
    let texts: Vec<String> = if raw_text {
        fs::read_to_string(input)?
            .lines()
            .map(str::to_string)
            .collect()
    } else {
        read_sentences_jsonl(input)?
            .into_iter()
            .map(|s| s.text)
            .collect()
    };
    let model = train_bpe(texts.iter(), ctx.config.vocab_size, SpecialTokens::default())
        .map_err(|e| usage(e.to_string()))?;
    model.save(out)?;

    let mut manifest = RunManifest::new("train-tokenizer", &ctx.config);
    manifest.add_input(input)?;
    manifest.add_output(out)?;
    ctx.write_manifest(&manifest, out)?;
    println!(
        "train-tokenizer: vocab {} ({} merges) -> {}",
        model.vocab_size(),
        model.merges().len(),
        out.display()
    );
    Ok(())
}

/// `augment`: sentence JSON lines -> augmentation-record JSON lines.
pub fn cmd_augment(ctx: &Ctx, sentences: &Path, lexicon: &str, out: &Path) -> Result<()> {
    require_file(sentences, "sentence input")?;
    let lex = if lexicon == "default" {
        SentimentLexicon::default()
    } else {
        let path = Path::new(lexicon);
        require_file(path, "lexicon")?;
        SentimentLexicon::parse(&fs::read_to_string(path)?).map_err(|e| usage(e.to_string()))?
    };
    let sents = read_sentences_jsonl(sentences)?;
    let output = augment_corpus(
        sents.iter(),
        &lex,
        ctx.config.sentiment_cap,
        ctx.config.seed,
        &SpecialTokens::default(),
    );
    write_jsonl(out, &output.records)?;

    let mut manifest = RunManifest::new("augment", &ctx.config);
    manifest.add_input(sentences)?;
    if lexicon != "default" {
        manifest.add_input(Path::new(lexicon))?;
    }
    manifest.add_output(out)?;
    ctx.write_manifest(&manifest, out)?;
    println!(
        "augment: {} qa pairs, {}/{} positive and {}/{} negative sentences -> {}",
        output.qa_count,
        output.records.iter().filter(|r| matches!(r.kind, crate::atf::RecordKind::SentimentPositive)).count(),
        output.positive_eligible,
        output.records.iter().filter(|r| matches!(r.kind, crate::atf::RecordKind::SentimentNegative)).count(),
        output.negative_eligible,
        out.display()
    );
    Ok(())
}

/// `pack`: sentences (+ optional augmentation records) -> packed binary,
/// optionally masked example files.
pub fn cmd_pack(
    ctx: &Ctx,
    sentences: &Path,
    augment: Option<&Path>,
    tokenizer: &Path,
    out: &Path,
    mask: bool,
) -> Result<()> {
    require_file(sentences, "sentence input")?;
    require_file(tokenizer, "tokenizer model")?;
    if let Some(a) = augment {
        require_file(a, "augmentation records")?;
    }
    let model = TokenizerModel::load(tokenizer).map_err(|e| usage(e.to_string()))?;

    let mut units: Vec<(String, String)> = read_sentences_jsonl(sentences)?
        .into_iter()
        .map(|s| (format!("{}#{}", s.doc_ref, s.index), s.text))
        .collect();
    if let Some(a) = augment {
        for (i, rec) in read_augmentation_jsonl(a)?.into_iter().enumerate() {
            units.push((format!("atf:{}#{}", rec.source_doc, i), rec.text));
        }
    }

    let sep = model.special_id(SpecialRole::SepDoc);
    let pad = model.special_id(SpecialRole::Pad);
    let encoded = units
        .into_iter()
        .map(|(doc_ref, text)| (doc_ref, model.encode(&text)));
    let seqs = concat_and_pack(encoded, ctx.config.seq_len, sep, pad)?;
    let header = RecordHeader {
        seq_len: ctx.config.seq_len as u32,
        vocab_size: model.vocab_size() as u32,
    };
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    write_packed_file(out, &seqs, header)?;

    let total_tokens: usize = seqs.iter().map(|s| s.content().len()).sum();
    let pad_total: usize = seqs.iter().map(|s| s.pad_len).sum();
    let mut meta = format!(
        "records={}\nseq_len={}\ntotal_tokens={}\npad_total={}\n",
        seqs.len(),
        ctx.config.seq_len,
        total_tokens,
        pad_total
    );

    let mut outputs = vec![out.to_path_buf()];
    if mask {
        let mask_seed = derive_seed(ctx.config.seed, "pack/mask");
        let cfg = MaskConfig {
            rate: ctx.config.mask_rate,
            scheme: ctx.config.mask_scheme,
            seed: mask_seed,
            exempt_specials: ctx.config.exempt_specials,
            mask_id: model.special_id(SpecialRole::Mask),
            num_specials: model.specials().len() as u32,
            vocab_size: model.vocab_size() as u32,
        };
        let examples: Vec<_> = seqs
            .iter()
            .enumerate()
            .map(|(ordinal, seq)| apply_masking(seq, &cfg, ordinal as u64))
            .collect();
        write_masked_files(out, &examples, header)?;
        meta.push_str(&format!(
            "mask_rate={}\nmask_scheme={}\nmask_seed={}\n",
            ctx.config.mask_rate,
            ctx.config.mask_scheme.name(),
            mask_seed
        ));
        outputs.push(PathBuf::from(format!("{}.inputs.bin", out.display())));
        outputs.push(PathBuf::from(format!("{}.labels.bin", out.display())));
    }
    let meta_path = PathBuf::from(format!("{}.meta", out.display()));
    fs::write(&meta_path, meta)?;
    outputs.push(meta_path);

    let mut manifest = RunManifest::new("pack", &ctx.config);
    manifest.add_input(sentences)?;
    if let Some(a) = augment {
        manifest.add_input(a)?;
    }
    manifest.add_input(tokenizer)?;
    for o in &outputs {
        manifest.add_output(o)?;
    }
    ctx.write_manifest(&manifest, out)?;
    println!(
        "pack: {} sequences of {} ({} tokens, {} pad) -> {}",
        seqs.len(),
        ctx.config.seq_len,
        total_tokens,
        pad_total,
        out.display()
    );
    Ok(())
}

/// `brak`: bracketed parse lines (or a right-branching fixture built from
/// sentences) -> validated, sampled bracketed corpus.
pub fn cmd_brak(
    ctx: &Ctx,
    parses: Option<&Path>,
    from_sentences: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let parsed: Vec<BracketedSentence> = match (parses, from_sentences) {
        (Some(path), None) => {
            require_file(path, "bracketed parses")?;
            let text = fs::read_to_string(path)?;
            let mut list = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let b = BracketedSentence::parse(line).map_err(|e| {
                    usage(format!("{}:{}: {e}", path.display(), lineno + 1))
                })?;
                list.push(b);
            }
            list
        }
        (None, Some(path)) => {
            require_file(path, "sentence input")?;
            read_sentences_jsonl(path)?
                .iter()
                .filter_map(|s| {
                    let norm = normalize_for_parsing(s);
                    BracketedSentence::right_branching(&norm.tokens)
                })
                .collect()
        }
        _ => {
            return Err(usage(
                "brak needs exactly one of --parses or --from-sentences",
            ))
        }
    };

    let selection = select_brak_subset(
        parsed,
        ctx.config.brak_n,
        ctx.config.brak_min_len,
        ctx.config.seed,
    );
    if selection.short() {
        eprintln!(
            "warning: only {} of the requested {} sentences are eligible",
            selection.sentences.len(),
            selection.requested
        );
    }
    let mut w = create(out)?;
    emit_brak_corpus(&selection.sentences, &mut w)?;
    w.flush()?;

    let mut manifest = RunManifest::new("brak", &ctx.config);
    if let Some(p) = parses {
        manifest.add_input(p)?;
    }
    if let Some(p) = from_sentences {
        manifest.add_input(p)?;
    }
    manifest.add_output(out)?;
    ctx.write_manifest(&manifest, out)?;
    println!(
        "brak: {} of {} eligible sentences -> {}",
        selection.sentences.len(),
        selection.eligible,
        out.display()
    );
    Ok(())
}

/// `omg`: message lines (or a synthesized corpus) -> validated train/dev
/// splits.
pub fn cmd_omg(
    ctx: &Ctx,
    input: Option<&Path>,
    synthesize: Option<usize>,
    train_out: &Path,
    dev_out: &Path,
) -> Result<()> {
    let messages = match (input, synthesize) {
        (Some(path), None) => {
            require_file(path, "message input")?;
            let text = fs::read_to_string(path)?;
            let mut msgs = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let raw = parse_message_line(line, lineno + 1)
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?;
                let msg =
                    validate_message(&raw, ctx.config.omg_vocab_size, ctx.config.omg_max_len)
                        .map_err(|e| {
                            usage(format!("{}:{}: {e}", path.display(), lineno + 1))
                        })?;
                msgs.push(msg);
            }
            msgs
        }
        (None, Some(n)) => synthesize_messages(
            n,
            ctx.config.omg_vocab_size,
            ctx.config.omg_max_len,
            ctx.config.seed,
        ),
        _ => return Err(usage("omg needs exactly one of --input or --synthesize")),
    };

    let total = messages.len();
    let (train, dev) = split_messages(messages, ctx.config.omg_train_frac, ctx.config.seed)
        .map_err(|e| usage(e.to_string()))?;
    for (path, split) in [(train_out, &train), (dev_out, &dev)] {
        let mut w = create(path)?;
        for msg in split {
            writeln!(w, "{}", msg.render_for_lm())?;
        }
        w.flush()?;
    }

    let mut manifest = RunManifest::new("omg", &ctx.config);
    if let Some(p) = input {
        manifest.add_input(p)?;
    }
    manifest.add_output(train_out)?;
    manifest.add_output(dev_out)?;
    ctx.write_manifest(&manifest, train_out)?;
    println!(
        "omg: {} messages -> {} train / {} dev",
        total,
        train.len(),
        dev.len()
    );
    Ok(())
}

/// `train-lm`: sentences + tokenizer -> n-gram model file.
pub fn cmd_train_lm(ctx: &Ctx, sentences: &Path, tokenizer: &Path, out: &Path) -> Result<()> {
    require_file(sentences, "sentence input")?;
    require_file(tokenizer, "tokenizer model")?;
    let model = TokenizerModel::load(tokenizer).map_err(|e| usage(e.to_string()))?;
    let sequences: Vec<Vec<u32>> = read_sentences_jsonl(sentences)?
        .iter()
        .map(|s| model.encode(&s.text))
        .filter(|ids| !ids.is_empty())
        .collect();
    let lm = train_ngram(
        sequences,
        ctx.config.ngram_order,
        ctx.config.ngram_alpha,
        model.vocab_size() as u32,
    )
    .map_err(|e| usage(e.to_string()))?;
    lm.save(out)?;

    let mut manifest = RunManifest::new("train-lm", &ctx.config);
    manifest.add_input(sentences)?;
    manifest.add_input(tokenizer)?;
    manifest.add_output(out)?;
    ctx.write_manifest(&manifest, out)?;
    println!(
        "train-lm: order {} over {} tokens -> {}",
        lm.order(),
        lm.total_forward_mass(),
        out.display()
    );
    Ok(())
}

/// `eval`: minimal pairs + (score file | n-gram scorer) -> report JSON and
/// table.
#[allow(clippy::too_many_arguments)]
pub fn cmd_eval(
    ctx: &Ctx,
    pairs_path: &Path,
    scores: Option<&Path>,
    lm: Option<&Path>,
    tokenizer: Option<&Path>,
    report_out: &Path,
) -> Result<()> {
    require_file(pairs_path, "pairs input")?;
    let pairs = read_pairs(pairs_path).map_err(|e| usage(e.to_string()))?;
    if pairs.is_empty() {
        return Err(usage("pairs file contains no pairs"));
    }

    let reports = match (scores, lm, tokenizer) {
        (Some(path), None, None) => {
            require_file(path, "score file")?;
            let table = read_scores(path).map_err(|e| usage(e.to_string()))?;
            evaluate_grouped_with_scores(&pairs, &table)?
        }
        (None, Some(lm_path), Some(tok_path)) => {
            require_file(lm_path, "language model")?;
            require_file(tok_path, "tokenizer model")?;
            let model = NGramModel::load(lm_path).map_err(|e| usage(e.to_string()))?;
            let tok = TokenizerModel::load(tok_path).map_err(|e| usage(e.to_string()))?;
            let scorer = PllScorer {
                model: &model,
                tokenizer: &tok,
            };
            evaluate_grouped(&scorer, &pairs)?
        }
        _ => {
            return Err(usage(
                "eval needs either --scores or both --lm and --tokenizer",
            ))
        }
    };
    let bench = BenchmarkReport::from_tasks(reports)?;
    let mut w = create(report_out)?;
    serde_json::to_writer_pretty(&mut w, &bench)?;
    w.write_all(b"\n")?;
    w.flush()?;
    print!("{}", bench.to_table());

    let mut manifest = RunManifest::new("eval", &ctx.config);
    manifest.add_input(pairs_path)?;
    for p in [scores, lm, tokenizer].into_iter().flatten() {
        manifest.add_input(p)?;
    }
    manifest.add_output(report_out)?;
    ctx.write_manifest(&manifest, report_out)?;
    Ok(())
}

/// `report`: pretty-print an existing report file.
pub fn cmd_report(report_path: &Path, json: bool) -> Result<()> {
    require_file(report_path, "report")?;
    let text = fs::read_to_string(report_path)?;
    let bench: BenchmarkReport =
        serde_json::from_str(&text).with_context(|| "parsing report JSON")?;
    if json {
        println!("{}", serde_json::to_string_pretty(&bench)?);
    } else {
        print!("{}", bench.to_table());
    }
    Ok(())
}
