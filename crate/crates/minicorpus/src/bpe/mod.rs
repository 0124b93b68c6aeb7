//! Byte-level BPE subword tokenizer.
//!
//! The base alphabet is all 256 byte values, so any input encodes without an
//! unknown-token path; `UNK` is kept for defensive decoding only. Word
//! boundaries are carried by the space byte attached to word-initial symbols
//! (merges never cross a pre-token boundary), which keeps
//! `decode(encode(s)) == s` exact for arbitrary text.
//!
//! Special tokens hold reserved ids below the byte alphabet, are recognized
//! in text by their canonical literal (e.g. `[SEP]`), and are never produced
//! by merges: literal occurrences are segmented out before pair counting and
//! before encoding.

mod train;
pub use train::{train_bpe, TrainError};

mod io;
pub use io::ModelParseError;

use std::collections::HashMap;
use std::sync::Mutex;

use thiserror::Error;

/// The named special tokens the pipeline reserves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpecialRole {
    /// Fill for the tail of the final packed sequence.
    Pad,
    /// Defensive decoding fallback; never produced by byte-level encoding.
    Unk,
    /// Masked-position placeholder for the MLM objective.
    Mask,
    /// Separator inserted between packed documents.
    SepDoc,
    /// Separator between a generated question and its answer.
    SepQa,
    /// Sentiment marker preceding a positive label word.
    SentPos,
    /// Sentiment marker preceding a negative label word.
    SentNeg,
}

impl SpecialRole {
    pub const ALL: [SpecialRole; 7] = [
        SpecialRole::Pad,
        SpecialRole::Unk,
        SpecialRole::Mask,
        SpecialRole::SepDoc,
        SpecialRole::SepQa,
        SpecialRole::SentPos,
        SpecialRole::SentNeg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpecialRole::Pad => "PAD",
            SpecialRole::Unk => "UNK",
            SpecialRole::Mask => "MASK",
            SpecialRole::SepDoc => "SEP_DOC",
            SpecialRole::SepQa => "SEP_QA",
            SpecialRole::SentPos => "SENT_POS",
            SpecialRole::SentNeg => "SENT_NEG",
        }
    }

    pub fn from_name(name: &str) -> Option<SpecialRole> {
        SpecialRole::ALL.iter().copied().find(|r| r.name() == name)
    }
}

/// The special-token set: seven fixed roles with configurable literals.
/// Ids are the role's position in [`SpecialRole::ALL`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialTokens {
    literals: [String; 7],
}

impl Default for SpecialTokens {
    fn default() -> Self {
        SpecialTokens {
            literals: [
                "[PAD]".into(),
                "[UNK]".into(),
                "[MASK]".into(),
                "[DOC]".into(),
                "[SEP]".into(),
                "[POS]".into(),
                "[NEG]".into(),
            ],
        }
    }
}

impl SpecialTokens {
    /// Override the canonical literal of one role.
    pub fn with_literal(mut self, role: SpecialRole, literal: &str) -> Self {
        self.literals[role as usize] = literal.to_string();
        self
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, role: SpecialRole) -> u32 {
        role as u32
    }

    pub fn literal(&self, role: SpecialRole) -> &str {
        &self.literals[role as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (SpecialRole, &str)> {
        SpecialRole::ALL
            .iter()
            .map(move |&r| (r, self.literal(r)))
    }
}

/// One learned merge rule: adjacent `(left, right)` becomes `result`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeRule {
    pub left: u32,
    pub right: u32,
    pub result: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("unknown token id {id} at position {position}")]
    UnknownId { position: usize, id: u32 },
    #[error("decoded byte sequence is not valid UTF-8 (byte offset {offset})")]
    InvalidUtf8 { offset: usize },
}

/// A trained tokenizer: immutable after training, safe to share across
/// threads for concurrent encode/decode.
#[derive(Debug)]
pub struct TokenizerModel {
    specials: SpecialTokens,
    /// Byte strings for non-special tokens; index 0 is the first byte symbol.
    tokens: Vec<Vec<u8>>,
    merges: Vec<MergeRule>,
    /// `(left, right) -> (rank, result)` for encoding.
    ranks: HashMap<(u32, u32), (u32, u32)>,
    /// Memoized chunk encodings; purely an encode cache.
    cache: Mutex<HashMap<Vec<u8>, Vec<u32>>>,
}

impl TokenizerModel {
    pub(crate) fn from_parts(
        specials: SpecialTokens,
        tokens: Vec<Vec<u8>>,
        merges: Vec<MergeRule>,
    ) -> Self {
        let ranks = merges
            .iter()
            .enumerate()
            .map(|(rank, m)| ((m.left, m.right), (rank as u32, m.result)))
            .collect();
        TokenizerModel {
            specials,
            tokens,
            merges,
            ranks,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.specials.len() + self.tokens.len()
    }

    pub fn specials(&self) -> &SpecialTokens {
        &self.specials
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    pub fn special_id(&self, role: SpecialRole) -> u32 {
        self.specials.id(role)
    }

    pub fn is_special(&self, id: u32) -> bool {
        (id as usize) < self.specials.len()
    }

    fn base_offset(&self) -> u32 {
        self.specials.len() as u32
    }

    fn byte_id(&self, b: u8) -> u32 {
        self.base_offset() + b as u32
    }

    /// Byte string of a token id; specials yield their literal's bytes.
    pub fn token_bytes(&self, id: u32) -> Option<&[u8]> {
        if self.is_special(id) {
            Some(self.specials.literals[id as usize].as_bytes())
        } else {
            self.tokens
                .get((id - self.base_offset()) as usize)
                .map(Vec::as_slice)
        }
    }

    /// Readable rendering of a token for reports; lossy on non-UTF-8 tokens.
    pub fn token_display(&self, id: u32) -> String {
        match self.token_bytes(id) {
            Some(b) => String::from_utf8_lossy(b).into_owned(),
            None => format!("<bad:{id}>"),
        }
    }

    /// Encode text to token ids: special literals map to their reserved ids,
    /// everything else goes through byte-level BPE.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        let mut ids = Vec::new();
        for segment in segment_specials(text, &self.specials) {
            match segment {
                Segment::Special(role) => ids.push(self.specials.id(role)),
                Segment::Text(part) => {
                    for chunk in pretokenize(part.as_bytes()) {
                        self.encode_chunk(chunk, &mut ids);
                    }
                }
            }
        }
        ids
    }

    fn encode_chunk(&self, chunk: &[u8], out: &mut Vec<u32>) {
        if let Some(hit) = self.cache.lock().unwrap().get(chunk) {
            out.extend_from_slice(hit);
            return;
        }
        let mut symbols: Vec<u32> = chunk.iter().map(|&b| self.byte_id(b)).collect();
        loop {
            // Lowest-rank adjacent pair first; equivalent to replaying the
            // merge list in training order.
            let mut best: Option<(u32, (u32, u32), u32)> = None;
            for w in symbols.windows(2) {
                if let Some(&(rank, result)) = self.ranks.get(&(w[0], w[1])) {
                    if best.map_or(true, |(r, _, _)| rank < r) {
                        best = Some((rank, (w[0], w[1]), result));
                    }
                }
            }
            let Some((_, pair, result)) = best else { break };
            apply_pair(&mut symbols, pair, result);
        }
        self.cache
            .lock()
            .unwrap()
            .insert(chunk.to_vec(), symbols.clone());
        out.extend_from_slice(&symbols);
    }

    /// Decode token ids back to text. Specials render as their canonical
    /// literal.
    pub fn decode(&self, ids: &[u32]) -> Result<String, DecodeError> {
        let mut bytes = Vec::new();
        for (position, &id) in ids.iter().enumerate() {
            let tok = self
                .token_bytes(id)
                .ok_or(DecodeError::UnknownId { position, id })?;
            bytes.extend_from_slice(tok);
        }
        String::from_utf8(bytes)
            .map_err(|e| DecodeError::InvalidUtf8 { offset: e.utf8_error().valid_up_to() })
    }
}

/// Replace every non-overlapping occurrence of `pair`, left to right.
pub(crate) fn apply_pair(symbols: &mut Vec<u32>, pair: (u32, u32), result: u32) {
    let mut write = 0;
    let mut read = 0;
    while read < symbols.len() {
        if read + 1 < symbols.len() && symbols[read] == pair.0 && symbols[read + 1] == pair.1 {
            symbols[write] = result;
            read += 2;
        } else {
            symbols[write] = symbols[read];
            read += 1;
        }
        write += 1;
    }
    symbols.truncate(write);
}

pub(crate) enum Segment<'a> {
    Text(&'a str),
    Special(SpecialRole),
}

/// Split text into plain segments and special-literal occurrences
/// (leftmost match first; the longest literal wins at equal starts).
pub(crate) fn segment_specials<'a>(text: &'a str, specials: &SpecialTokens) -> Vec<Segment<'a>> {
    let mut segments = Vec::new();
    let mut cursor = 0;
    while cursor < text.len() {
        let rest = &text[cursor..];
        let mut hit: Option<(usize, usize, SpecialRole)> = None; // (start, len, role)
        for (role, literal) in specials.iter() {
            if literal.is_empty() {
                continue;
            }
            if let Some(start) = rest.find(literal) {
                let better = match hit {
                    None => true,
                    Some((s, l, _)) => start < s || (start == s && literal.len() > l),
                };
                if better {
                    hit = Some((start, literal.len(), role));
                }
            }
        }
        match hit {
            Some((start, len, role)) => {
                if start > 0 {
                    segments.push(Segment::Text(&rest[..start]));
                }
                segments.push(Segment::Special(role));
                cursor += start + len;
            }
            None => {
                segments.push(Segment::Text(rest));
                break;
            }
        }
    }
    segments
}

/// Split bytes into BPE pre-tokens. A pre-token is a non-space run with its
/// single leading space attached (the word-boundary marker); surplus spaces
/// form their own runs. Concatenating the pre-tokens reproduces the input.
pub(crate) fn pretokenize(bytes: &[u8]) -> Vec<&[u8]> {
    let mut chunks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b' ' {
            let mut j = i;
            while j < bytes.len() && bytes[j] != b' ' {
                j += 1;
            }
            chunks.push(&bytes[i..j]);
            i = j;
        } else {
            let mut j = i;
            while j < bytes.len() && bytes[j] == b' ' {
                j += 1;
            }
            if j < bytes.len() {
                // One space binds to the following word.
                if j - i > 1 {
                    chunks.push(&bytes[i..j - 1]);
                }
                let mut k = j;
                while k < bytes.len() && bytes[k] != b' ' {
                    k += 1;
                }
                chunks.push(&bytes[j - 1..k]);
                i = k;
            } else {
                chunks.push(&bytes[i..j]);
                i = j;
            }
        }
    }
    chunks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chunks(s: &str) -> Vec<&[u8]> {
        pretokenize(s.as_bytes())
    }

    #[test]
    fn pretokenize_attaches_single_leading_space() {
        assert_eq!(chunks("a b"), vec![b"a".as_slice(), b" b".as_slice()]);
        assert_eq!(chunks(" a"), vec![b" a".as_slice()]);
        assert_eq!(
            chunks("a  b"),
            vec![b"a".as_slice(), b" ".as_slice(), b" b".as_slice()]
        );
        assert_eq!(chunks("a "), vec![b"a".as_slice(), b" ".as_slice()]);
        assert_eq!(chunks(""), Vec::<&[u8]>::new());
    }

    #[test]
    fn pretokenize_preserves_every_byte() {
        for s in ["hello world", "  doubled  spaces ", "no-spaces", " ", "a b c"] {
            let joined: Vec<u8> = chunks(s).concat();
            assert_eq!(joined, s.as_bytes());
        }
    }

    #[test]
    fn specials_have_distinct_reserved_ids() {
        let sp = SpecialTokens::default();
        let ids: Vec<u32> = SpecialRole::ALL.iter().map(|&r| sp.id(r)).collect();
        assert_eq!(ids, vec![0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(sp.literal(SpecialRole::SepQa), "[SEP]");
        assert_eq!(sp.literal(SpecialRole::Mask), "[MASK]");
    }

    #[test]
    fn segmenting_finds_literals_between_text() {
        let sp = SpecialTokens::default();
        let segs = segment_specials("q one? [SEP] an answer", &sp);
        let mut literals = 0;
        let mut text = String::new();
        for s in &segs {
            match s {
                Segment::Special(role) => {
                    literals += 1;
                    assert_eq!(*role, SpecialRole::SepQa);
                }
                Segment::Text(t) => text.push_str(t),
            }
        }
        assert_eq!(literals, 1);
        assert_eq!(text, "q one?  an answer");
    }

    #[test]
    fn apply_pair_is_left_to_right_non_overlapping() {
        let mut syms = vec![1, 1, 1];
        apply_pair(&mut syms, (1, 1), 9);
        assert_eq!(syms, vec![9, 1]);

        let mut syms = vec![1, 1, 1, 1];
        apply_pair(&mut syms, (1, 1), 9);
        assert_eq!(syms, vec![9, 9]);
    }
}
