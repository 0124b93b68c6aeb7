//! Corpus engineering toolkit for training masked language models in
//! low-resource settings.
//!
//! The crate covers the data side of a small-corpus pretraining recipe:
//!
//! * [`ingest`] — load raw text corpora, segment them into documents and
//!   sentences, and normalize sentences for parser input.
//! * [`bpe`] — train and apply a byte-level BPE subword tokenizer with the
//!   pipeline's special tokens.
//! * [`atf`] — automatic task formation: mine surface patterns to synthesize
//!   question-answer pairs and sentiment-tagged sentences that are appended
//!   to the training corpus.
//! * [`pack`] — concatenate tokenized units with separator tokens into
//!   fixed-length sequences and apply masked-token corruption.
//! * [`brak`] — prepare, validate, and sample bracketed (constituency-marked)
//!   corpora for a pre-pre-training stage.
//! * [`omg`] — validate, split, and format emergent-language message corpora.
//! * [`ngram`] — a bidirectional n-gram model with additive smoothing that
//!   provides pseudo-log-likelihood sentence scores at desk scale.
//! * [`eval`] — zero-shot minimal-pair acceptability evaluation with
//!   per-task and macro-averaged reporting.
//!
//! Orchestration lives in [`commands`], driven by the `minicorpus` binary;
//! [`config`] holds the pipeline defaults and [`manifest`] writes provenance
//! records for every produced artifact. All randomness flows from a single
//! root seed through [`seeding`].
//!
//! Each major capability has a runnable example under `examples/`; see the
//! README for a tour.

pub mod atf;
pub mod bpe;
pub mod brak;
pub mod commands;
pub mod config;
pub mod eval;
pub mod ingest;
pub mod manifest;
pub mod ngram;
pub mod omg;
pub mod pack;
pub mod seeding;

pub use bpe::{SpecialRole, SpecialTokens, TokenizerModel};
pub use config::PipelineConfig;
pub use ingest::{Document, NormalizedSentence, Sentence};
