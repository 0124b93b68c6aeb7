//! Bidirectional n-gram language model with additive smoothing.
//!
//! Stands in for a trained masked LM so the evaluation harness runs at desk
//! scale: each position is scored as if masked, mixing a forward model over
//! preceding context with a backward model over following context, and a
//! sentence's score is the sum of its per-position log-probabilities
//! (the pseudo-log-likelihood).
//!
//! Sequence edges are padded with a reserved boundary id one past the
//! vocabulary, so boundary context never collides with real tokens.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NgramError {
    #[error("order must be at least 1, got {0}")]
    BadOrder(usize),
    #[error("alpha must be positive, got {0}")]
    BadAlpha(f64),
    #[error("vocab size must be positive")]
    BadVocab,
    #[error("context length {got} does not match order-1 = {want}")]
    BadContextLength { got: usize, want: usize },
    #[error("cannot score an empty token list")]
    EmptyInput,
    #[error("model file line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
struct ContextCounts {
    total: u64,
    by_token: HashMap<u32, u64>,
}

type CountTable = HashMap<Vec<u32>, ContextCounts>;

/// Count-based bidirectional n-gram model. Immutable once trained.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    alpha: f64,
    vocab_size: u32,
    forward: CountTable,
    backward: CountTable,
}

/// Accumulate forward and backward context counts over token sequences.
pub fn train_ngram<I, S>(
    sequences: I,
    order: usize,
    alpha: f64,
    vocab_size: u32,
) -> Result<NGramModel, NgramError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u32]>,
{
    if order < 1 {
        return Err(NgramError::BadOrder(order));
    }
    if !(alpha > 0.0) {
        return Err(NgramError::BadAlpha(alpha));
    }
    if vocab_size == 0 {
        return Err(NgramError::BadVocab);
    }
    let mut model = NGramModel {
        order,
        alpha,
        vocab_size,
        forward: HashMap::new(),
        backward: HashMap::new(),
    };
    for seq in sequences {
        model.observe(seq.as_ref());
    }
    Ok(model)
}

impl NGramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab_size
    }

    /// The reserved boundary-padding id (one past the vocabulary).
    pub fn boundary_id(&self) -> u32 {
        self.vocab_size
    }

    fn observe(&mut self, seq: &[u32]) {
        let n = self.order;
        for i in 0..seq.len() {
            let ctx = context_window(seq, i, n, self.vocab_size, Direction::Forward);
            bump(&mut self.forward, ctx, seq[i]);
        }
        for i in 0..seq.len() {
            let ctx = context_window(seq, i, n, self.vocab_size, Direction::Backward);
            bump(&mut self.backward, ctx, seq[i]);
        }
    }

    /// Forward (preceding, boundary-padded) context of position `i`.
    pub fn left_context(&self, seq: &[u32], i: usize) -> Vec<u32> {
        context_window(seq, i, self.order, self.vocab_size, Direction::Forward)
    }

    /// Backward (following, nearest-last) context of position `i`.
    pub fn right_context(&self, seq: &[u32], i: usize) -> Vec<u32> {
        context_window(seq, i, self.order, self.vocab_size, Direction::Backward)
    }

    fn smoothed(&self, table: &CountTable, ctx: &[u32], token: u32) -> f64 {
        let (count, total) = match table.get(ctx) {
            Some(c) => (c.by_token.get(&token).copied().unwrap_or(0), c.total),
            None => (0, 0),
        };
        (count as f64 + self.alpha) / (total as f64 + self.alpha * self.vocab_size as f64)
    }

    /// Smoothed forward conditional `P(token | preceding context)`.
    pub fn forward_prob(&self, ctx: &[u32], token: u32) -> Result<f64, NgramError> {
        self.check_ctx(ctx)?;
        Ok(self.smoothed(&self.forward, ctx, token))
    }

    /// Smoothed backward conditional `P(token | following context)`.
    pub fn backward_prob(&self, ctx: &[u32], token: u32) -> Result<f64, NgramError> {
        self.check_ctx(ctx)?;
        Ok(self.smoothed(&self.backward, ctx, token))
    }

    fn check_ctx(&self, ctx: &[u32]) -> Result<(), NgramError> {
        if ctx.len() != self.order - 1 {
            return Err(NgramError::BadContextLength {
                got: ctx.len(),
                want: self.order - 1,
            });
        }
        Ok(())
    }

    /// `log(0.5·P_fwd(t|left) + 0.5·P_bwd(t|right))`; finite for alpha > 0.
    pub fn token_logprob(
        &self,
        left_ctx: &[u32],
        right_ctx: &[u32],
        token: u32,
    ) -> Result<f64, NgramError> {
        let fwd = self.forward_prob(left_ctx, token)?;
        let bwd = self.backward_prob(right_ctx, token)?;
        Ok((0.5 * fwd + 0.5 * bwd).ln())
    }

    /// Sum of per-position scores, each position scored as if masked.
    ///
    /// Boundary ids inside the list act as context severers: they shape
    /// their neighbors' contexts but are not themselves scored.
    pub fn pseudo_log_likelihood(&self, ids: &[u32]) -> Result<f64, NgramError> {
        if ids.is_empty() {
            return Err(NgramError::EmptyInput);
        }
        let mut score = 0.0;
        for i in 0..ids.len() {
            if ids[i] == self.boundary_id() {
                continue;
            }
            let left = self.left_context(ids, i);
            let right = self.right_context(ids, i);
            score += self.token_logprob(&left, &right, ids[i])?;
        }
        Ok(score)
    }

    /// Raw forward count table view for exactness checks.
    pub fn forward_counts(&self) -> impl Iterator<Item = (&[u32], u32, u64)> {
        iter_counts(&self.forward)
    }

    pub fn backward_counts(&self) -> impl Iterator<Item = (&[u32], u32, u64)> {
        iter_counts(&self.backward)
    }

    /// Total forward count mass (equals total tokens observed).
    pub fn total_forward_mass(&self) -> u64 {
        self.forward.values().map(|c| c.total).sum()
    }
}

enum Direction {
    Forward,
    Backward,
}

/// The `order-1` context tokens of position `i`, boundary-padded. Forward
/// contexts run oldest-first over preceding tokens; backward contexts are
/// the same window over the reversed sequence.
fn context_window(seq: &[u32], i: usize, order: usize, vocab: u32, dir: Direction) -> Vec<u32> {
    let boundary = vocab;
    let span = order - 1;
    let mut ctx = Vec::with_capacity(span);
    for k in (1..=span).rev() {
        let item = match dir {
            Direction::Forward => i.checked_sub(k).map(|j| seq[j]),
            Direction::Backward => {
                let j = i + k;
                (j < seq.len()).then(|| seq[j])
            }
        };
        ctx.push(item.unwrap_or(boundary));
    }
    ctx
}

fn bump(table: &mut CountTable, ctx: Vec<u32>, token: u32) {
    let entry = table.entry(ctx).or_default();
    entry.total += 1;
    *entry.by_token.entry(token).or_insert(0) += 1;
}

fn iter_counts(table: &CountTable) -> impl Iterator<Item = (&[u32], u32, u64)> {
    table.iter().flat_map(|(ctx, counts)| {
        counts
            .by_token
            .iter()
            .map(move |(&tok, &count)| (ctx.as_slice(), tok, count))
    })
}

// ── Plain-text model format ─────────────────────────────────────────────────

const MAGIC: &str = "minicorpus-ngram v1";

fn sorted_records(table: &CountTable) -> Vec<(Vec<u32>, u32, u64)> {
    let mut records: Vec<(Vec<u32>, u32, u64)> = iter_counts(table)
        .map(|(ctx, tok, count)| (ctx.to_vec(), tok, count))
        .collect();
    records.sort();
    records
}

impl NGramModel {
    /// Render as sorted `ctx<TAB>token<TAB>count` records in forward and
    /// backward sections.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{MAGIC} order={} alpha={} vocab_size={}",
            self.order, self.alpha, self.vocab_size
        )
        .unwrap();
        for (name, table) in [("[forward]", &self.forward), ("[backward]", &self.backward)] {
            out.push_str(name);
            out.push('\n');
            for (ctx, tok, count) in sorted_records(table) {
                let ctx_str = ctx
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                writeln!(out, "{ctx_str}\t{tok}\t{count}").unwrap();
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, self.to_text())
    }

    pub fn parse(text: &str) -> Result<NGramModel, NgramError> {
        let parse_err = |line: usize, message: &str| NgramError::Parse {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(parse_err(1, "empty file"))?;
        let rest = header
            .strip_prefix(MAGIC)
            .ok_or(parse_err(1, "missing header"))?;
        let mut order = None;
        let mut alpha = None;
        let mut vocab_size = None;
        for field in rest.split_whitespace() {
            if let Some(v) = field.strip_prefix("order=") {
                order = v.parse::<usize>().ok();
            } else if let Some(v) = field.strip_prefix("alpha=") {
                alpha = v.parse::<f64>().ok();
            } else if let Some(v) = field.strip_prefix("vocab_size=") {
                vocab_size = v.parse::<u32>().ok();
            }
        }
        let order = order.ok_or(parse_err(1, "bad order"))?;
        let alpha = alpha.ok_or(parse_err(1, "bad alpha"))?;
        let vocab_size = vocab_size.ok_or(parse_err(1, "bad vocab_size"))?;

        let mut model = NGramModel {
            order,
            alpha,
            vocab_size,
            forward: HashMap::new(),
            backward: HashMap::new(),
        };
        let mut section: Option<bool> = None; // true = forward
        for (lineno, line) in lines {
            match line {
                "" => continue,
                "[forward]" => section = Some(true),
                "[backward]" => section = Some(false),
                record => {
                    let fields: Vec<&str> = record.split('\t').collect();
                    if fields.len() != 3 {
                        return Err(parse_err(lineno + 1, "expected ctx<TAB>token<TAB>count"));
                    }
                    let ctx: Vec<u32> = fields[0]
                        .split_whitespace()
                        .map(|t| t.parse::<u32>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| parse_err(lineno + 1, "bad context id"))?;
                    if ctx.len() != order - 1 {
                        return Err(parse_err(lineno + 1, "context length mismatch"));
                    }
                    let token: u32 = fields[1]
                        .parse()
                        .map_err(|_| parse_err(lineno + 1, "bad token id"))?;
                    let count: u64 = fields[2]
                        .parse()
                        .map_err(|_| parse_err(lineno + 1, "bad count"))?;
                    let table = match section {
                        Some(true) => &mut model.forward,
                        Some(false) => &mut model.backward,
                        None => return Err(parse_err(lineno + 1, "record before a section")),
                    };
                    let entry = table.entry(ctx).or_default();
                    entry.total += count;
                    *entry.by_token.entry(token).or_insert(0) += count;
                }
            }
        }
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<NGramModel, NgramError> {
        let text = fs::read_to_string(path).map_err(|e| NgramError::Parse {
            line: 0,
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bigram_counts_one_observation() {
        // corpus "a b" as ids [0, 1]
        let m = train_ngram([[0u32, 1]], 2, 0.5, 2).unwrap();
        let b = m.boundary_id();
        assert_eq!(
            m.forward_counts()
                .find(|(ctx, tok, _)| ctx == &[0] && *tok == 1)
                .map(|(_, _, c)| c),
            Some(1)
        );
        assert_eq!(
            m.forward_counts()
                .find(|(ctx, tok, _)| ctx == &[b] && *tok == 0)
                .map(|(_, _, c)| c),
            Some(1)
        );
        assert_eq!(m.total_forward_mass(), 2);
    }

    #[test]
    fn empty_model_is_uniform() {
        let m = train_ngram(Vec::<Vec<u32>>::new(), 2, 1.0, 8).unwrap();
        let b = m.boundary_id();
        for t in 0..8 {
            let lp = m.token_logprob(&[b], &[b], t).unwrap();
            assert!((lp - (1.0f64 / 8.0).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn double_training_doubles_counts_and_keeps_conditionals() {
        let seqs = vec![vec![0u32, 1, 2], vec![2, 1]];
        let once = train_ngram(seqs.iter(), 2, 1e-9, 3).unwrap();
        let twice = train_ngram(seqs.iter().chain(seqs.iter()), 2, 1e-9, 3).unwrap();
        for (ctx, tok, count) in once.forward_counts() {
            let doubled = twice
                .forward_counts()
                .find(|(c, t, _)| *c == ctx && *t == tok)
                .map(|(_, _, n)| n);
            assert_eq!(doubled, Some(count * 2));
        }
        let p1 = once.forward_prob(&[0], 1).unwrap();
        let p2 = twice.forward_prob(&[0], 1).unwrap();
        assert!((p1 - p2).abs() < 1e-6);
    }

    #[test]
    fn hand_computed_trigram_free_probabilities() {
        // corpus [5, 6, 7], order 2, alpha 0.5, V = 10
        let m = train_ngram([[5u32, 6, 7]], 2, 0.5, 10).unwrap();
        let lp = m.token_logprob(&[5], &[7], 6).unwrap();
        // P_fwd(6|[5]) = (1+0.5)/(1+0.5*10) = 0.25, same backward.
        assert!((lp - 0.25f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn logprob_increases_with_count() {
        let few = train_ngram(vec![vec![0u32, 1]; 2], 2, 0.5, 4).unwrap();
        let many = train_ngram(vec![vec![0u32, 1]; 20], 2, 0.5, 4).unwrap();
        let b = few.boundary_id();
        let lp_few = few.token_logprob(&[0], &[b], 1).unwrap();
        let lp_many = many.token_logprob(&[0], &[b], 1).unwrap();
        assert!(lp_many > lp_few);
    }

    #[test]
    fn single_token_on_empty_model_scores_uniform() {
        let m = train_ngram(Vec::<Vec<u32>>::new(), 3, 0.5, 16).unwrap();
        let pll = m.pseudo_log_likelihood(&[3]).unwrap();
        assert!((pll - (1.0f64 / 16.0).ln()).abs() < 1e-12);
        assert_eq!(m.pseudo_log_likelihood(&[]), Err(NgramError::EmptyInput));
    }

    #[test]
    fn pll_is_permutation_sensitive() {
        let m = train_ngram(vec![vec![0u32, 1]; 10], 2, 0.1, 2).unwrap();
        let trained = m.pseudo_log_likelihood(&[0, 1, 0, 1]).unwrap();
        let permuted = m.pseudo_log_likelihood(&[1, 0, 1, 0]).unwrap();
        assert!(trained > permuted);
        let straight = m.pseudo_log_likelihood(&[0, 1]).unwrap();
        let reversed = m.pseudo_log_likelihood(&[1, 0]).unwrap();
        assert!(straight > reversed);
    }

    #[test]
    fn conditionals_sum_to_one() {
        let m = train_ngram(vec![vec![0u32, 1, 2, 1, 0]; 3], 3, 0.25, 5).unwrap();
        for ctx in [vec![0u32, 1], vec![1, 2], vec![m.boundary_id(), 0], vec![4, 4]] {
            let sum: f64 = (0..5)
                .map(|t| m.forward_prob(&ctx, t).unwrap())
                .sum();
            assert!((sum - 1.0).abs() < 1e-9, "sum {sum} for ctx {ctx:?}");
        }
    }

    #[test]
    fn pll_is_additive_across_boundary_severed_segments() {
        let m = train_ngram(vec![vec![0u32, 1, 2], vec![2, 1, 0]], 3, 0.5, 3).unwrap();
        let b = m.boundary_id();
        let seg1 = [0u32, 1, 2];
        let seg2 = [2u32, 2, 0];
        let mut joined = Vec::new();
        joined.extend_from_slice(&seg1);
        joined.extend(std::iter::repeat(b).take(m.order() - 1));
        joined.extend_from_slice(&seg2);
        let sum = m.pseudo_log_likelihood(&seg1).unwrap()
            + m.pseudo_log_likelihood(&seg2).unwrap();
        let whole = m.pseudo_log_likelihood(&joined).unwrap();
        assert!((whole - sum).abs() < 1e-9);
    }

    #[test]
    fn text_format_round_trips() {
        let m = train_ngram(vec![vec![0u32, 1, 2, 3], vec![3, 2, 1]], 3, 0.1, 6).unwrap();
        let text = m.to_text();
        let back = NGramModel::parse(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), text);
        assert!(NGramModel::parse("junk").is_err());
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert_eq!(
            train_ngram(Vec::<Vec<u32>>::new(), 0, 0.5, 4),
            Err(NgramError::BadOrder(0))
        );
        assert_eq!(
            train_ngram(Vec::<Vec<u32>>::new(), 2, 0.0, 4),
            Err(NgramError::BadAlpha(0.0))
        );
    }
}
