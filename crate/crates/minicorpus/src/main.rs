use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use minicorpus::commands::{self, Ctx, UsageError};
use minicorpus::config::PipelineConfig;

/// Corpus engineering pipeline for low-resource masked-LM training.
#[derive(Parser)]
#[command(name = "minicorpus", version, about)]
struct Cli {
    /// Key=value configuration file; flags override its settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root seed; every stage derives its own labeled sub-seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Upper bound on worker threads (stages may use fewer).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Write the run manifest here instead of next to the first output.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load raw corpora and emit sentence JSON lines.
    Ingest {
        /// Corpora manifest: `name=path` per line, order significant.
        #[arg(long)]
        corpora: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Treat every line as its own document (default: blank-line
        /// delimited).
        #[arg(long)]
        per_line: bool,
    },
    /// Train the BPE tokenizer.
    TrainTokenizer {
        /// Sentence JSON lines (or raw text with --raw-text).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        raw_text: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        vocab_size: Option<usize>,
    },
    /// Mine QA pairs and sentiment-tagged sentences.
    Augment {
        #[arg(long)]
        sentences: PathBuf,
        /// `default` for the built-in lists, or a lexicon file path.
        #[arg(long, default_value = "default")]
        lexicon: String,
        #[arg(long)]
        out: PathBuf,
        /// Per-label sentiment cap.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Pack tokenized text into fixed-length sequences; optionally mask.
    Pack {
        #[arg(long)]
        sentences: PathBuf,
        /// Augmentation records appended after the natural text.
        #[arg(long)]
        augment: Option<PathBuf>,
        #[arg(long)]
        tokenizer: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Sequence length.
        #[arg(long)]
        len: Option<usize>,
        /// Also write masked inputs/labels record files.
        #[arg(long)]
        mask: bool,
        #[arg(long)]
        rate: Option<f64>,
        /// `mask-only` or `bert-80-10-10`.
        #[arg(long)]
        scheme: Option<String>,
    },
    /// Validate, sample, and emit a bracketed corpus.
    Brak {
        /// File of bracketed parse lines.
        #[arg(long)]
        parses: Option<PathBuf>,
        /// Build right-branching fixture parses from sentence JSON lines.
        #[arg(long)]
        from_sentences: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        min_len: Option<usize>,
    },
    /// Validate and split an emergent-message corpus.
    Omg {
        /// Message file: one space-separated integer message per line.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Synthesize this many messages instead of reading a file.
        #[arg(long)]
        synthesize: Option<usize>,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        dev_out: PathBuf,
        #[arg(long)]
        vocab: Option<u32>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        train_frac: Option<f64>,
    },
    /// Train the reference n-gram language model.
    TrainLm {
        #[arg(long)]
        sentences: PathBuf,
        #[arg(long)]
        tokenizer: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Zero-shot minimal-pair evaluation.
    Eval {
        /// Pair JSON lines: {uid, phenomenon, sentence_good, sentence_bad}.
        #[arg(long)]
        pairs: PathBuf,
        /// Score JSON lines: {uid, score_good, score_bad}.
        #[arg(long)]
        scores: Option<PathBuf>,
        /// n-gram model file (requires --tokenizer).
        #[arg(long)]
        lm: Option<PathBuf>,
        #[arg(long)]
        tokenizer: Option<PathBuf>,
        #[arg(long)]
        report: PathBuf,
    },
    /// Pretty-print an evaluation report.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn resolve_config(cli: &Cli) -> anyhow::Result<PipelineConfig> {
    let mut config = PipelineConfig::default();
    if let Some(path) = &cli.config {
        config
            .apply_file(path)
            .map_err(|e| commands::usage(e.to_string()))?;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if cli.threads == 0 {
        return Err(commands::usage("--threads must be at least 1"));
    }
    // Per-subcommand flag overrides, applied before validation.
    match &cli.command {
        Command::TrainTokenizer { vocab_size, .. } => {
            if let Some(v) = vocab_size {
                config.vocab_size = *v;
            }
        }
        Command::Augment { cap, .. } => {
            if let Some(c) = cap {
                config.sentiment_cap = *c;
            }
        }
        Command::Pack { len, rate, scheme, .. } => {
            if let Some(l) = len {
                config.seq_len = *l;
            }
            if let Some(r) = rate {
                config.mask_rate = *r;
            }
            if let Some(s) = scheme {
                config.mask_scheme = minicorpus::pack::MaskScheme::parse(s)
                    .ok_or_else(|| commands::usage(format!("unknown mask scheme {s:?}")))?;
            }
        }
        Command::Brak { n, min_len, .. } => {
            if let Some(n) = n {
                config.brak_n = *n;
            }
            if let Some(m) = min_len {
                config.brak_min_len = *m;
            }
        }
        Command::Omg {
            vocab,
            max_len,
            train_frac,
            ..
        } => {
            if let Some(v) = vocab {
                config.omg_vocab_size = *v;
            }
            if let Some(m) = max_len {
                config.omg_max_len = *m;
            }
            if let Some(f) = train_frac {
                config.omg_train_frac = *f;
            }
        }
        Command::TrainLm { order, alpha, .. } => {
            if let Some(o) = order {
                config.ngram_order = *o;
            }
            if let Some(a) = alpha {
                config.ngram_alpha = *a;
            }
        }
        _ => {}
    }
    config
        .validate()
        .map_err(|e| commands::usage(e.to_string()))?;
    Ok(config)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = resolve_config(&cli)?;
    let mut ctx = Ctx::new(config);
    ctx.manifest_path = cli.manifest.clone();

    match &cli.command {
        Command::Ingest {
            corpora,
            out,
            per_line,
        } => commands::cmd_ingest(&ctx, corpora, out, *per_line),
        Command::TrainTokenizer {
            input,
            raw_text,
            out,
            ..
        } => commands::cmd_train_tokenizer(&ctx, input, *raw_text, out),
        Command::Augment {
            sentences,
            lexicon,
            out,
            ..
        } => commands::cmd_augment(&ctx, sentences, lexicon, out),
        Command::Pack {
            sentences,
            augment,
            tokenizer,
            out,
            mask,
            ..
        } => commands::cmd_pack(&ctx, sentences, augment.as_deref(), tokenizer, out, *mask),
        Command::Brak {
            parses,
            from_sentences,
            out,
            ..
        } => commands::cmd_brak(&ctx, parses.as_deref(), from_sentences.as_deref(), out),
        Command::Omg {
            input,
            synthesize,
            train_out,
            dev_out,
            ..
        } => commands::cmd_omg(&ctx, input.as_deref(), *synthesize, train_out, dev_out),
        Command::TrainLm {
            sentences,
            tokenizer,
            out,
            ..
        } => commands::cmd_train_lm(&ctx, sentences, tokenizer, out),
        Command::Eval {
            pairs,
            scores,
            lm,
            tokenizer,
            report,
        } => commands::cmd_eval(
            &ctx,
            pairs,
            scores.as_deref(),
            lm.as_deref(),
            tokenizer.as_deref(),
            report,
        ),
        Command::Report { input, json } => commands::cmd_report(input, *json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
