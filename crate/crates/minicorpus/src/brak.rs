//! Bracketed (constituency-marked) corpus preparation.
//!
//! A bracketed sentence is a space-separated line over `[`, `]`, and word
//! tokens, e.g. `[ [ they are ] placed ]`. Bracketings are consumed from
//! externally produced parse files; a trivial right-branching bracketer is
//! bundled for fixture generation. The emitted corpus feeds back into the
//! ordinary ingest → tokenize → pack pipeline, with `[` and `]` treated as
//! plain text.

use std::io::Write;

use rand::Rng;
use thiserror::Error;

use crate::seeding::derive_rng;

/// One item of the bracket sequence; `Word` indexes into the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketItem {
    Open,
    Close,
    Word(usize),
}

/// A validated bracketed sentence: balanced, properly nested, no empty
/// constituents, in-order words reproducing the surface exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketedSentence {
    items: Vec<BracketItem>,
    surface: Vec<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BracketError {
    #[error("unbalanced close bracket at token {position}")]
    UnbalancedClose { position: usize },
    #[error("{open} bracket(s) left open at end of line")]
    UnbalancedOpen { open: usize },
    #[error("empty constituent at token {position}")]
    EmptyConstituent { position: usize },
}

impl BracketedSentence {
    /// Parse a space-separated line of `[`, `]`, and word tokens.
    pub fn parse(line: &str) -> Result<Self, BracketError> {
        let mut items = Vec::new();
        let mut surface = Vec::new();
        let mut depth = 0usize;
        for (position, token) in line.split_whitespace().enumerate() {
            match token {
                "[" => {
                    depth += 1;
                    items.push(BracketItem::Open);
                }
                "]" => {
                    if depth == 0 {
                        return Err(BracketError::UnbalancedClose { position });
                    }
                    if matches!(items.last(), Some(BracketItem::Open)) {
                        return Err(BracketError::EmptyConstituent { position });
                    }
                    depth -= 1;
                    items.push(BracketItem::Close);
                }
                word => {
                    items.push(BracketItem::Word(surface.len()));
                    surface.push(word.to_string());
                }
            }
        }
        if depth != 0 {
            return Err(BracketError::UnbalancedOpen { open: depth });
        }
        Ok(BracketedSentence { items, surface })
    }

    /// Surface tokens only.
    pub fn surface(&self) -> &[String] {
        &self.surface
    }

    pub fn items(&self) -> &[BracketItem] {
        &self.items
    }

    /// Number of constituents (matched bracket pairs).
    pub fn constituents(&self) -> usize {
        self.items
            .iter()
            .filter(|i| matches!(i, BracketItem::Open))
            .count()
    }

    /// Render back to the space-separated line form.
    pub fn render(&self) -> String {
        self.items
            .iter()
            .map(|item| match item {
                BracketItem::Open => "[",
                BracketItem::Close => "]",
                BracketItem::Word(i) => self.surface[*i].as_str(),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Build a right-branching bracketing over plain tokens; a fixture
    /// generator standing in for an external parser.
    pub fn right_branching(tokens: &[String]) -> Option<Self> {
        if tokens.is_empty() {
            return None;
        }
        fn build(items: &mut Vec<BracketItem>, start: usize, n: usize) {
            items.push(BracketItem::Open);
            if n <= 2 {
                for k in 0..n {
                    items.push(BracketItem::Word(start + k));
                }
            } else {
                items.push(BracketItem::Word(start));
                build(items, start + 1, n - 1);
            }
            items.push(BracketItem::Close);
        }
        let mut items = Vec::new();
        build(&mut items, 0, tokens.len());
        Some(BracketedSentence {
            items,
            surface: tokens.to_vec(),
        })
    }
}

/// Surface tokens of a bracketed sentence.
pub fn strip_brackets(b: &BracketedSentence) -> Vec<String> {
    b.surface.to_vec()
}

/// Outcome of subset selection, including the shortfall signal.
#[derive(Debug, Clone)]
pub struct BrakSelection {
    pub sentences: Vec<BracketedSentence>,
    pub eligible: usize,
    pub requested: usize,
}

impl BrakSelection {
    /// Fewer eligible sentences than requested; callers should warn.
    pub fn short(&self) -> bool {
        self.sentences.len() < self.requested
    }
}

/// Filter to a minimum surface length, then sample `n` sentences uniformly
/// without replacement under the seed. Selected sentences keep their stream
/// order.
pub fn select_brak_subset<I>(parses: I, n: usize, min_len: usize, seed: u64) -> BrakSelection
where
    I: IntoIterator<Item = BracketedSentence>,
{
    let mut rng = derive_rng(seed, "brak/sample");
    let mut reservoir: Vec<(usize, BracketedSentence)> = Vec::with_capacity(n);
    let mut eligible = 0usize;
    for sentence in parses {
        if sentence.surface().len() < min_len {
            continue;
        }
        let idx = eligible;
        eligible += 1;
        if reservoir.len() < n {
            reservoir.push((idx, sentence));
        } else if n > 0 {
            let j = rng.random_range(0..eligible);
            if j < n {
                reservoir[j] = (idx, sentence);
            }
        }
    }
    reservoir.sort_by_key(|(idx, _)| *idx);
    BrakSelection {
        sentences: reservoir.into_iter().map(|(_, s)| s).collect(),
        eligible,
        requested: n,
    }
}

/// Write one rendered bracketed sentence per line.
pub fn emit_brak_corpus<W: Write>(
    subset: &[BracketedSentence],
    out: &mut W,
) -> std::io::Result<()> {
    for sentence in subset {
        writeln!(out, "{}", sentence.render())?;
    }
    Ok(())
}
