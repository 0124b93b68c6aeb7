//! BPE training: iterative most-frequent-pair merging over pre-token types.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use thiserror::Error;

use super::{pretokenize, segment_specials, MergeRule, Segment, SpecialTokens, TokenizerModel};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrainError {
    #[error(
        "vocab size {requested} cannot fit the byte alphabet plus {specials} special tokens \
         (minimum {minimum})"
    )]
    VocabTooSmall {
        requested: usize,
        specials: usize,
        minimum: usize,
    },
    #[error("corpus exhausted at vocab size {achieved} before reaching {requested}")]
    VocabUnreachable { requested: usize, achieved: usize },
}

/// Train a byte-level BPE model to exactly `vocab_size` entries
/// (specials + 256 byte symbols + learned merges).
///
/// The most frequent adjacent pair is merged each round; frequency ties are
/// broken by the lexicographic order of the pair's byte strings, so training
/// is deterministic across platforms and runs.
pub fn train_bpe<I, S>(
    texts: I,
    vocab_size: usize,
    specials: SpecialTokens,
) -> Result<TokenizerModel, TrainError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let base = specials.len() + 256;
    if vocab_size < base {
        return Err(TrainError::VocabTooSmall {
            requested: vocab_size,
            specials: specials.len(),
            minimum: base,
        });
    }
    let target_merges = vocab_size - base;

    // Pre-token type frequencies. Special literals never contribute pairs.
    let mut chunk_counts: HashMap<Vec<u8>, u64> = HashMap::new();
    for text in texts {
        for segment in segment_specials(text.as_ref(), &specials) {
            if let Segment::Text(part) = segment {
                for chunk in pretokenize(part.as_bytes()) {
                    *chunk_counts.entry(chunk.to_vec()).or_insert(0) += 1;
                }
            }
        }
    }

    let mut trainer = Trainer::new(specials, target_merges);
    for (chunk, freq) in chunk_counts {
        trainer.add_word(&chunk, freq);
    }
    trainer.run(vocab_size)
}

/// Heap entry ordered by count, then lexicographically smallest byte pair,
/// then smallest id pair. Entries are lazily invalidated against the live
/// count table.
struct Candidate {
    count: u64,
    left_bytes: Vec<u8>,
    right_bytes: Vec<u8>,
    pair: (u32, u32),
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.left_bytes.cmp(&self.left_bytes))
            .then_with(|| other.right_bytes.cmp(&self.right_bytes))
            .then_with(|| other.pair.cmp(&self.pair))
    }
}

struct Trainer {
    specials: SpecialTokens,
    target_merges: usize,
    /// Byte strings of non-special symbols; index = id - specials.len().
    tokens: Vec<Vec<u8>>,
    /// Distinct pre-token types as symbol sequences, with frequencies.
    words: Vec<(Vec<u32>, u64)>,
    pair_counts: HashMap<(u32, u32), u64>,
    /// Words that may contain a pair (superset; stale entries are skipped).
    pair_words: HashMap<(u32, u32), HashSet<u32>>,
    heap: BinaryHeap<Candidate>,
    merges: Vec<MergeRule>,
}

impl Trainer {
    fn new(specials: SpecialTokens, target_merges: usize) -> Self {
        let tokens = (0u16..256).map(|b| vec![b as u8]).collect();
        Trainer {
            specials,
            target_merges,
            tokens,
            words: Vec::new(),
            pair_counts: HashMap::new(),
            pair_words: HashMap::new(),
            heap: BinaryHeap::new(),
            merges: Vec::new(),
        }
    }

    fn base_offset(&self) -> u32 {
        self.specials.len() as u32
    }

    fn bytes_of(&self, id: u32) -> &[u8] {
        &self.tokens[(id - self.base_offset()) as usize]
    }

    fn add_word(&mut self, chunk: &[u8], freq: u64) {
        let base = self.base_offset();
        let symbols: Vec<u32> = chunk.iter().map(|&b| base + b as u32).collect();
        let idx = self.words.len() as u32;
        for w in symbols.windows(2) {
            let pair = (w[0], w[1]);
            *self.pair_counts.entry(pair).or_insert(0) += freq;
            self.pair_words.entry(pair).or_default().insert(idx);
        }
        self.words.push((symbols, freq));
    }

    fn push_candidate(&mut self, pair: (u32, u32)) {
        let Some(&count) = self.pair_counts.get(&pair) else { return };
        self.heap.push(Candidate {
            count,
            left_bytes: self.bytes_of(pair.0).to_vec(),
            right_bytes: self.bytes_of(pair.1).to_vec(),
            pair,
        });
    }

    fn pop_best(&mut self) -> Option<(u32, u32)> {
        while let Some(top) = self.heap.pop() {
            if self.pair_counts.get(&top.pair) == Some(&top.count) {
                return Some(top.pair);
            }
        }
        None
    }

    fn run(mut self, vocab_size: usize) -> Result<TokenizerModel, TrainError> {
        let pairs: Vec<(u32, u32)> = self.pair_counts.keys().copied().collect();
        for pair in pairs {
            self.push_candidate(pair);
        }

        while self.merges.len() < self.target_merges {
            let Some(pair) = self.pop_best() else {
                return Err(TrainError::VocabUnreachable {
                    requested: vocab_size,
                    achieved: self.base_offset() as usize + self.tokens.len(),
                });
            };
            self.merge(pair);
        }

        Ok(TokenizerModel::from_parts(
            self.specials,
            self.tokens,
            self.merges,
        ))
    }

    fn merge(&mut self, pair: (u32, u32)) {
        let mut merged = self.bytes_of(pair.0).to_vec();
        merged.extend_from_slice(self.bytes_of(pair.1));
        let result = self.base_offset() + self.tokens.len() as u32;
        self.tokens.push(merged);
        self.merges.push(MergeRule {
            left: pair.0,
            right: pair.1,
            result,
        });

        let mut affected: Vec<u32> = self
            .pair_words
            .remove(&pair)
            .map(|s| s.into_iter().collect())
            .unwrap_or_default();
        affected.sort_unstable();

        let mut touched: HashSet<(u32, u32)> = HashSet::new();
        for word_idx in affected {
            let (symbols, freq) = &self.words[word_idx as usize];
            let freq = *freq;
            if !symbols.windows(2).any(|w| (w[0], w[1]) == pair) {
                continue; // stale index entry
            }
            let old = symbols.clone();
            let mut new = old.clone();
            super::apply_pair(&mut new, pair, result);

            for w in old.windows(2) {
                let p = (w[0], w[1]);
                let e = self.pair_counts.get_mut(&p).expect("count underflow");
                *e -= freq;
                if *e == 0 {
                    self.pair_counts.remove(&p);
                }
                touched.insert(p);
            }
            for w in new.windows(2) {
                let p = (w[0], w[1]);
                *self.pair_counts.entry(p).or_insert(0) += freq;
                self.pair_words.entry(p).or_default().insert(word_idx);
                touched.insert(p);
            }
            self.words[word_idx as usize].0 = new;
        }

        for p in touched {
            if p != pair {
                self.push_candidate(p);
            }
        }
    }
}
