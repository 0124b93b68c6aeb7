//! Emergent-language message corpora: validation, train/dev splitting, and
//! plain-text formatting for pre-pre-training.
//!
//! Messages are sequences of integer symbols produced elsewhere (a
//! referential game between neural agents); this module consumes them from
//! files, one space-separated message per line, with symbol `0` closing a
//! message that ends before the maximum length.

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::seeding::derive_rng;

/// Default symbol vocabulary size of the message corpus.
pub const DEFAULT_VOCAB_SIZE: u32 = 4035;
/// Default maximum message length.
pub const DEFAULT_MAX_LEN: usize = 15;
/// Default train fraction of the train/dev split.
pub const DEFAULT_TRAIN_FRAC: f64 = 0.95;

/// End-of-message symbol.
pub const EOM: u32 = 0;

/// A validated emergent-language message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmergentMessage {
    symbols: Vec<u32>,
}

#[derive(Debug, Error, PartialEq)]
pub enum OmgError {
    #[error("message is empty")]
    Empty,
    #[error("symbol {symbol} at index {index} is outside [0, {vocab_size})")]
    OutOfRange {
        index: usize,
        symbol: u32,
        vocab_size: u32,
    },
    #[error("message length {len} exceeds maximum {max_len}")]
    TooLong { len: usize, max_len: usize },
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("line {line}: {text:?} is not a space-separated integer message")]
    BadLine { line: usize, text: String },
}

impl EmergentMessage {
    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false // validation rejects empty messages
    }

    /// One line of LM training text: space-separated decimal symbols.
    pub fn render_for_lm(&self) -> String {
        render_symbols(&self.symbols)
    }
}

pub fn render_symbols(symbols: &[u32]) -> String {
    symbols
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Accept a raw symbol list iff non-empty, within the length bound, and with
/// every symbol in `[0, vocab_size)`.
pub fn validate_message(
    raw: &[u32],
    vocab_size: u32,
    max_len: usize,
) -> Result<EmergentMessage, OmgError> {
    if raw.is_empty() {
        return Err(OmgError::Empty);
    }
    if raw.len() > max_len {
        return Err(OmgError::TooLong {
            len: raw.len(),
            max_len,
        });
    }
    for (index, &symbol) in raw.iter().enumerate() {
        if symbol >= vocab_size {
            return Err(OmgError::OutOfRange {
                index,
                symbol,
                vocab_size,
            });
        }
    }
    Ok(EmergentMessage {
        symbols: raw.to_vec(),
    })
}

/// Parse one message line into raw symbols (unvalidated).
pub fn parse_message_line(line: &str, lineno: usize) -> Result<Vec<u32>, OmgError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<u32>().map_err(|_| OmgError::BadLine {
                line: lineno,
                text: line.to_string(),
            })
        })
        .collect()
}

/// Deterministic shuffle under the seed, then cut at `floor(train_frac · N)`.
pub fn split_messages(
    mut messages: Vec<EmergentMessage>,
    train_frac: f64,
    seed: u64,
) -> Result<(Vec<EmergentMessage>, Vec<EmergentMessage>), OmgError> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(OmgError::BadFraction(train_frac));
    }
    let mut rng = derive_rng(seed, "omg/split");
    messages.shuffle(&mut rng);
    let cut = (train_frac * messages.len() as f64).floor() as usize;
    let dev = messages.split_off(cut);
    Ok((messages, dev))
}

/// Synthesize a message corpus for fixtures: lengths uniform in
/// `[1, max_len]`, symbols Zipf-distributed over `[1, vocab_size)`, the
/// terminator appended where it still fits.
pub fn synthesize_messages(
    n: usize,
    vocab_size: u32,
    max_len: usize,
    seed: u64,
) -> Vec<EmergentMessage> {
    use rand::Rng;
    let mut rng = derive_rng(seed, "omg/synthesize");
    let zipf = ZipfTable::new(vocab_size);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let content_len = rng.random_range(1..=max_len);
        let mut symbols = Vec::with_capacity(content_len + 1);
        for _ in 0..content_len {
            symbols.push(zipf.sample(rng.random::<f64>()));
        }
        if content_len < max_len {
            symbols.push(EOM);
        }
        out.push(EmergentMessage { symbols });
    }
    out
}

/// Inverse-CDF table for a Zipf(s=1) distribution over symbols
/// `1..vocab_size`.
struct ZipfTable {
    cumulative: Vec<f64>,
}

impl ZipfTable {
    fn new(vocab_size: u32) -> Self {
        assert!(vocab_size >= 2, "need at least one non-terminator symbol");
        let mut cumulative = Vec::with_capacity(vocab_size as usize - 1);
        let mut total = 0.0;
        for k in 1..vocab_size {
            total += 1.0 / k as f64;
            cumulative.push(total);
        }
        ZipfTable { cumulative }
    }

    fn sample(&self, unit: f64) -> u32 {
        let target = unit * self.cumulative.last().copied().unwrap_or(1.0);
        let idx = self.cumulative.partition_point(|&c| c <= target);
        (idx.min(self.cumulative.len() - 1) + 1) as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The reference message shape: four content symbols, a repeated filler,
    /// and the terminator, at exactly the maximum length.
    fn reference_message() -> Vec<u32> {
        let mut m = vec![1019, 3876, 601, 2194];
        m.extend(std::iter::repeat(3360).take(10));
        m.push(EOM);
        m
    }

    #[test]
    fn reference_message_is_valid_under_defaults() {
        let raw = reference_message();
        assert_eq!(raw.len(), 15);
        let msg = validate_message(&raw, DEFAULT_VOCAB_SIZE, DEFAULT_MAX_LEN).unwrap();
        assert_eq!(
            msg.render_for_lm(),
            "1019 3876 601 2194 3360 3360 3360 3360 3360 3360 3360 3360 3360 3360 0"
        );
    }

    #[test]
    fn minimal_and_invalid_messages() {
        assert!(validate_message(&[0], DEFAULT_VOCAB_SIZE, DEFAULT_MAX_LEN).is_ok());
        assert_eq!(
            validate_message(&[5000], 4035, 15),
            Err(OmgError::OutOfRange {
                index: 0,
                symbol: 5000,
                vocab_size: 4035
            })
        );
        assert_eq!(
            validate_message(&[1; 16], 4035, 15),
            Err(OmgError::TooLong { len: 16, max_len: 15 })
        );
        assert_eq!(validate_message(&[], 4035, 15), Err(OmgError::Empty));
    }

    #[test]
    fn render_empty_symbols_is_empty_line() {
        assert_eq!(render_symbols(&[]), "");
        assert_eq!(render_symbols(&[1019, 0]), "1019 0");
    }

    #[test]
    fn rendered_lines_re_validate() {
        for msg in synthesize_messages(200, 50, 8, 3) {
            let raw = parse_message_line(&msg.render_for_lm(), 1).unwrap();
            assert_eq!(validate_message(&raw, 50, 8).unwrap(), msg);
        }
    }

    #[test]
    fn split_is_an_exact_partition() {
        let msgs = synthesize_messages(100, 50, 8, 1);
        let (train, dev) = split_messages(msgs.clone(), 0.95, 9).unwrap();
        assert_eq!(train.len(), 95);
        assert_eq!(dev.len(), 5);
        let mut all: Vec<String> = train.iter().chain(&dev).map(|m| m.render_for_lm()).collect();
        let mut orig: Vec<String> = msgs.iter().map(|m| m.render_for_lm()).collect();
        all.sort();
        orig.sort();
        assert_eq!(all, orig);
    }

    #[test]
    fn split_is_deterministic() {
        let msgs = synthesize_messages(100, 50, 8, 1);
        let a = split_messages(msgs.clone(), 0.8, 9).unwrap();
        let b = split_messages(msgs, 0.8, 9).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn bad_fractions_are_rejected() {
        let msgs = synthesize_messages(10, 50, 8, 1);
        assert!(split_messages(msgs.clone(), 0.0, 1).is_err());
        assert!(split_messages(msgs.clone(), 1.0, 1).is_err());
        assert!(split_messages(msgs, -0.5, 1).is_err());
    }

    #[test]
    fn synthesizer_contract() {
        assert!(synthesize_messages(0, 4035, 15, 1).is_empty());
        let msgs = synthesize_messages(500, DEFAULT_VOCAB_SIZE, DEFAULT_MAX_LEN, 11);
        for m in &msgs {
            validate_message(m.symbols(), DEFAULT_VOCAB_SIZE, DEFAULT_MAX_LEN).unwrap();
            if m.len() < DEFAULT_MAX_LEN {
                assert_eq!(m.symbols().last(), Some(&EOM));
            }
        }
    }

    #[test]
    fn zipf_heavily_favors_low_symbols() {
        let msgs = synthesize_messages(20_000, DEFAULT_VOCAB_SIZE, DEFAULT_MAX_LEN, 5);
        let mut count_1 = 0usize;
        let mut count_1000 = 0usize;
        for m in &msgs {
            for &s in m.symbols() {
                if s == 1 {
                    count_1 += 1;
                } else if s == 1000 {
                    count_1000 += 1;
                }
            }
        }
        assert!(
            count_1 > 10 * count_1000.max(1),
            "zipf skew missing: {count_1} vs {count_1000}"
        );
    }
}
