//! Zero-shot minimal-pair acceptability evaluation.
//!
//! A scorer assigns each sentence a real-valued score (higher = more
//! probable); a pair counts as correct when the acceptable sentence scores
//! strictly higher than the unacceptable one. Ties count as incorrect.
//! Task accuracies are macro-averaged into the benchmark score.
//!
//! Scores can come from the built-in n-gram scorer or from a score-file
//! interchange (`{uid, score_good, score_bad}` JSON lines), so externally
//! trained models can be evaluated without being reimplemented here.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bpe::TokenizerModel;
use crate::ngram::NGramModel;

/// One acceptable/unacceptable sentence pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalPair {
    pub uid: String,
    pub phenomenon: String,
    pub sentence_good: String,
    pub sentence_bad: String,
}

impl MinimalPair {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.sentence_good == self.sentence_bad {
            return Err(EvalError::DegeneratePair {
                uid: self.uid.clone(),
            });
        }
        if self.phenomenon.is_empty() {
            return Err(EvalError::MissingPhenomenon {
                uid: self.uid.clone(),
            });
        }
        Ok(())
    }
}

/// Externally produced scores for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub uid: String,
    pub score_good: f64,
    pub score_bad: f64,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("pair {uid}: good and bad sentences are identical")]
    DegeneratePair { uid: String },
    #[error("pair {uid}: empty phenomenon tag")]
    MissingPhenomenon { uid: String },
    #[error("pair {uid}: scorer failed: {message}")]
    ScorerFailure { uid: String, message: String },
    #[error("pair {uid}: no entry in the score file")]
    MissingScore { uid: String },
    #[error("cannot evaluate an empty pair list")]
    EmptyTask,
    #[error("cannot aggregate zero task reports")]
    EmptyAggregate,
    #[error("task has mixed phenomena: {first} and {second}")]
    MixedPhenomena { first: String, second: String },
    #[error("{path} line {line}: {message}")]
    BadFile {
        path: String,
        line: usize,
        message: String,
    },
}

/// Pair-level outcome of a score comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Judgment {
    Correct,
    Incorrect,
    Tie,
}

/// Compare a pair's scores. Correct iff the good sentence scores strictly
/// higher; exact equality is a tie.
pub fn judge_pair(score_good: f64, score_bad: f64) -> Judgment {
    if score_good > score_bad {
        Judgment::Correct
    } else if score_good == score_bad {
        Judgment::Tie
    } else {
        Judgment::Incorrect
    }
}

/// Anything that can score a sentence; deterministic for a fixed model.
pub trait Scorer {
    fn score(&self, sentence: &str) -> Result<f64, String>;
}

/// Pseudo-log-likelihood scorer backed by the n-gram model and tokenizer.
pub struct PllScorer<'a> {
    pub model: &'a NGramModel,
    pub tokenizer: &'a TokenizerModel,
}

impl Scorer for PllScorer<'_> {
    fn score(&self, sentence: &str) -> Result<f64, String> {
        let ids = self.tokenizer.encode(sentence);
        self.model
            .pseudo_log_likelihood(&ids)
            .map_err(|e| e.to_string())
    }
}

/// Per-phenomenon evaluation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub phenomenon: String,
    pub n_pairs: usize,
    pub n_correct: usize,
    pub accuracy: f64,
}

impl TaskReport {
    fn new(phenomenon: String, n_pairs: usize, n_correct: usize) -> Self {
        TaskReport {
            phenomenon,
            n_pairs,
            n_correct,
            accuracy: n_correct as f64 / n_pairs as f64,
        }
    }
}

fn check_single_phenomenon(pairs: &[MinimalPair]) -> Result<&str, EvalError> {
    let first = &pairs[0].phenomenon;
    for p in pairs {
        if &p.phenomenon != first {
            return Err(EvalError::MixedPhenomena {
                first: first.clone(),
                second: p.phenomenon.clone(),
            });
        }
    }
    Ok(first)
}

/// Judge every pair of a single-phenomenon task with a scorer.
pub fn evaluate_task<S: Scorer>(
    scorer: &S,
    pairs: &[MinimalPair],
) -> Result<TaskReport, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyTask);
    }
    let phenomenon = check_single_phenomenon(pairs)?.to_string();
    let mut n_correct = 0;
    for pair in pairs {
        pair.validate()?;
        let judgment = judge_with_scorer(scorer, pair)?;
        if judgment == Judgment::Correct {
            n_correct += 1;
        }
    }
    Ok(TaskReport::new(phenomenon, pairs.len(), n_correct))
}

pub fn judge_with_scorer<S: Scorer>(
    scorer: &S,
    pair: &MinimalPair,
) -> Result<Judgment, EvalError> {
    let fail = |message: String| EvalError::ScorerFailure {
        uid: pair.uid.clone(),
        message,
    };
    let good = scorer.score(&pair.sentence_good).map_err(fail)?;
    let bad = scorer.score(&pair.sentence_bad).map_err(|m| EvalError::ScorerFailure {
        uid: pair.uid.clone(),
        message: m,
    })?;
    Ok(judge_pair(good, bad))
}

/// Group pairs by phenomenon (sorted by name) and evaluate each task.
pub fn evaluate_grouped<S: Scorer>(
    scorer: &S,
    pairs: &[MinimalPair],
) -> Result<Vec<TaskReport>, EvalError> {
    let mut groups: BTreeMap<&str, Vec<MinimalPair>> = BTreeMap::new();
    for p in pairs {
        groups.entry(&p.phenomenon).or_default().push(p.clone());
    }
    groups
        .into_values()
        .map(|task| evaluate_task(scorer, &task))
        .collect()
}

/// Evaluate from a score-file table instead of a live scorer.
pub fn evaluate_grouped_with_scores(
    pairs: &[MinimalPair],
    scores: &HashMap<String, (f64, f64)>,
) -> Result<Vec<TaskReport>, EvalError> {
    let mut groups: BTreeMap<&str, Vec<&MinimalPair>> = BTreeMap::new();
    for p in pairs {
        groups.entry(&p.phenomenon).or_default().push(p);
    }
    let mut reports = Vec::new();
    for (phenomenon, task) in groups {
        if task.is_empty() {
            return Err(EvalError::EmptyTask);
        }
        let mut n_correct = 0;
        for pair in &task {
            pair.validate()?;
            let &(good, bad) = scores.get(&pair.uid).ok_or(EvalError::MissingScore {
                uid: pair.uid.clone(),
            })?;
            if judge_pair(good, bad) == Judgment::Correct {
                n_correct += 1;
            }
        }
        reports.push(TaskReport::new(phenomenon.to_string(), task.len(), n_correct));
    }
    if reports.is_empty() {
        return Err(EvalError::EmptyTask);
    }
    Ok(reports)
}

/// Unweighted arithmetic mean of task accuracies (macro average).
pub fn aggregate(reports: &[TaskReport]) -> Result<f64, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::EmptyAggregate);
    }
    Ok(reports.iter().map(|r| r.accuracy).sum::<f64>() / reports.len() as f64)
}

/// Full benchmark result: per-task reports plus the macro average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub tasks: Vec<TaskReport>,
    pub n_tasks: usize,
    pub aggregate: f64,
}

impl BenchmarkReport {
    pub fn from_tasks(tasks: Vec<TaskReport>) -> Result<Self, EvalError> {
        let aggregate = aggregate(&tasks)?;
        Ok(BenchmarkReport {
            n_tasks: tasks.len(),
            aggregate,
            tasks,
        })
    }

    /// Plain-text table rendering.
    pub fn to_table(&self) -> String {
        let width = self
            .tasks
            .iter()
            .map(|t| t.phenomenon.len())
            .chain(["macro average".len()])
            .max()
            .unwrap_or(16)
            .max(16);
        let mut out = String::new();
        writeln!(out, "{:<width$}  {:>7}  {:>7}  {:>8}", "phenomenon", "pairs", "correct", "accuracy").unwrap();
        for t in &self.tasks {
            writeln!(
                out,
                "{:<width$}  {:>7}  {:>7}  {:>8.4}",
                t.phenomenon, t.n_pairs, t.n_correct, t.accuracy
            )
            .unwrap();
        }
        writeln!(out, "{:<width$}  {:>7}  {:>7}  {:>8.4}", "macro average", "", "", self.aggregate)
            .unwrap();
        out
    }
}

/// Read BLiMP-style pair JSON lines.
pub fn read_pairs(path: &Path) -> Result<Vec<MinimalPair>, EvalError> {
    let text = fs::read_to_string(path).map_err(|e| EvalError::BadFile {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let pair: MinimalPair = serde_json::from_str(line).map_err(|e| EvalError::BadFile {
            path: path.display().to_string(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        pair.validate()?;
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Read the score-interchange JSON lines into a uid-keyed table.
pub fn read_scores(path: &Path) -> Result<HashMap<String, (f64, f64)>, EvalError> {
    let text = fs::read_to_string(path).map_err(|e| EvalError::BadFile {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut table = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: PairScores = serde_json::from_str(line).map_err(|e| EvalError::BadFile {
            path: path.display().to_string(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        table.insert(rec.uid, (rec.score_good, rec.score_bad));
    }
    Ok(table)
}
