//! Plain-text tokenizer model format.
//!
//! ```text
//! minicorpus-bpe v1 vocab_size=NNNN specials=PAD:0,UNK:1,...
//! [vocab]
//! <token, escaped>\t<id>
//! [merges]
//! <left, escaped>\t<right, escaped>\t<left-id>\t<right-id>
//! ```
//!
//! Token bytes are escaped to printable ASCII (`\t \n \r \\` plus `\xHH` for
//! everything non-printable), so the file survives any text editor. Merge
//! lines carry ids as well as text because two distinct merge paths can
//! produce byte-identical tokens.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use super::{MergeRule, SpecialRole, SpecialTokens, TokenizerModel};

const MAGIC: &str = "minicorpus-bpe v1";

#[derive(Debug, Error)]
pub enum ModelParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("model file is empty or missing the `{MAGIC}` header")]
    BadHeader,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn escape(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len());
    for &b in bytes {
        match b {
            b'\\' => out.push_str("\\\\"),
            b'\t' => out.push_str("\\t"),
            b'\n' => out.push_str("\\n"),
            b'\r' => out.push_str("\\r"),
            0x20..=0x7e => out.push(b as char),
            _ => out.push_str(&format!("\\x{b:02x}")),
        }
    }
    out
}

fn unescape(text: &str) -> Option<Vec<u8>> {
    let mut out = Vec::with_capacity(text.len());
    let mut chars = text.bytes();
    while let Some(b) = chars.next() {
        if b != b'\\' {
            out.push(b);
            continue;
        }
        match chars.next()? {
            b'\\' => out.push(b'\\'),
            b't' => out.push(b'\t'),
            b'n' => out.push(b'\n'),
            b'r' => out.push(b'\r'),
            b'x' => {
                let hi = chars.next()?;
                let lo = chars.next()?;
                let hex = [hi, lo];
                let s = std::str::from_utf8(&hex).ok()?;
                out.push(u8::from_str_radix(s, 16).ok()?);
            }
            _ => return None,
        }
    }
    Some(out)
}

impl TokenizerModel {
    /// Render the model in the two-section plain-text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let specials: Vec<String> = self
            .specials
            .iter()
            .map(|(role, _)| format!("{}:{}", role.name(), self.specials.id(role)))
            .collect();
        out.push_str(&format!(
            "{MAGIC} vocab_size={} specials={}\n",
            self.vocab_size(),
            specials.join(",")
        ));
        out.push_str("[vocab]\n");
        for id in 0..self.vocab_size() as u32 {
            let bytes = self.token_bytes(id).expect("dense ids");
            out.push_str(&format!("{}\t{}\n", escape(bytes), id));
        }
        out.push_str("[merges]\n");
        for m in &self.merges {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                escape(self.token_bytes(m.left).expect("left token")),
                escape(self.token_bytes(m.right).expect("right token")),
                m.left,
                m.right
            ));
        }
        out
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, self.to_text())
    }

    pub fn parse(text: &str) -> Result<TokenizerModel, ModelParseError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(ModelParseError::BadHeader)?;
        let rest = header
            .strip_prefix(MAGIC)
            .ok_or(ModelParseError::BadHeader)?;

        let mut vocab_size: Option<usize> = None;
        let mut special_ids: HashMap<SpecialRole, u32> = HashMap::new();
        for field in rest.split_whitespace() {
            if let Some(v) = field.strip_prefix("vocab_size=") {
                vocab_size = v.parse().ok();
            } else if let Some(v) = field.strip_prefix("specials=") {
                for part in v.split(',') {
                    let (name, id) = part.split_once(':').ok_or(ModelParseError::BadHeader)?;
                    let role = SpecialRole::from_name(name).ok_or(ModelParseError::BadHeader)?;
                    let id = id.parse().map_err(|_| ModelParseError::BadHeader)?;
                    special_ids.insert(role, id);
                }
            }
        }
        let vocab_size = vocab_size.ok_or(ModelParseError::BadHeader)?;
        // Ids are positional; the header is validated against that layout.
        for (pos, role) in SpecialRole::ALL.iter().enumerate() {
            if special_ids.get(role) != Some(&(pos as u32)) {
                return Err(ModelParseError::BadHeader);
            }
        }

        let malformed = |line: usize, message: &str| ModelParseError::Malformed {
            line: line + 1,
            message: message.to_string(),
        };

        let mut vocab: Vec<Vec<u8>> = Vec::with_capacity(vocab_size);
        let mut merges: Vec<MergeRule> = Vec::new();
        let mut section = "";
        for (lineno, line) in lines {
            if line == "[vocab]" || line == "[merges]" {
                section = line;
                continue;
            }
            if line.is_empty() {
                continue;
            }
            match section {
                "[vocab]" => {
                    let (tok, id) = line
                        .split_once('\t')
                        .ok_or_else(|| malformed(lineno, "expected token<TAB>id"))?;
                    let id: usize = id
                        .parse()
                        .map_err(|_| malformed(lineno, "bad token id"))?;
                    if id != vocab.len() {
                        return Err(malformed(lineno, "vocab ids must be dense and ordered"));
                    }
                    let bytes =
                        unescape(tok).ok_or_else(|| malformed(lineno, "bad token escape"))?;
                    vocab.push(bytes);
                }
                "[merges]" => {
                    let fields: Vec<&str> = line.split('\t').collect();
                    if fields.len() != 4 {
                        return Err(malformed(lineno, "expected left<TAB>right<TAB>ids"));
                    }
                    let left: u32 = fields[2]
                        .parse()
                        .map_err(|_| malformed(lineno, "bad left id"))?;
                    let right: u32 = fields[3]
                        .parse()
                        .map_err(|_| malformed(lineno, "bad right id"))?;
                    let result = (SpecialRole::ALL.len() + 256 + merges.len()) as u32;
                    merges.push(MergeRule { left, right, result });
                }
                _ => return Err(malformed(lineno, "content before [vocab] section")),
            }
        }

        if vocab.len() != vocab_size {
            return Err(ModelParseError::Malformed {
                line: 0,
                message: format!(
                    "header says vocab_size={vocab_size} but {} entries found",
                    vocab.len()
                ),
            });
        }

        // The vocab section repeats the special literals; reconstruct them
        // and cross-check against the positional layout.
        let mut specials = SpecialTokens::default();
        for (pos, role) in SpecialRole::ALL.iter().enumerate() {
            let literal = String::from_utf8(vocab[pos].clone()).map_err(|_| {
                ModelParseError::Malformed {
                    line: 0,
                    message: format!("special literal for {} is not UTF-8", role.name()),
                }
            })?;
            specials = specials.with_literal(*role, &literal);
        }
        let tokens = vocab.split_off(SpecialRole::ALL.len());

        let model = TokenizerModel::from_parts(specials, tokens, merges);
        for m in model.merges() {
            let mut joined = model
                .token_bytes(m.left)
                .ok_or(ModelParseError::BadHeader)?
                .to_vec();
            joined.extend_from_slice(model.token_bytes(m.right).ok_or(ModelParseError::BadHeader)?);
            if model.token_bytes(m.result) != Some(joined.as_slice()) {
                return Err(ModelParseError::Malformed {
                    line: 0,
                    message: format!("merge for id {} does not rebuild its token", m.result),
                });
            }
        }
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<TokenizerModel, ModelParseError> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::super::train_bpe;
    use super::*;

    #[test]
    fn escape_round_trips_arbitrary_bytes() {
        let cases: Vec<Vec<u8>> = vec![
            b"plain".to_vec(),
            b" lead".to_vec(),
            vec![0x00, 0xff, 0x80],
            b"tab\there".to_vec(),
            b"back\\slash".to_vec(),
        ];
        for bytes in cases {
            assert_eq!(unescape(&escape(&bytes)).unwrap(), bytes);
        }
    }

    #[test]
    fn model_text_round_trip_preserves_behavior() {
        let corpus = ["the quick brown fox", "the slow brown cat", "a fox and a cat"];
        let model = train_bpe(corpus, 7 + 256 + 20, SpecialTokens::default()).unwrap();
        let text = model.to_text();
        let reloaded = TokenizerModel::parse(&text).unwrap();
        assert_eq!(reloaded.vocab_size(), model.vocab_size());
        assert_eq!(reloaded.merges(), model.merges());
        for s in ["the quick cat", "unseen words!", "a [SEP] b"] {
            assert_eq!(model.encode(s), reloaded.encode(s));
        }
        assert_eq!(reloaded.to_text(), text);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(TokenizerModel::parse("").is_err());
        assert!(TokenizerModel::parse("not a model\n").is_err());
    }
}
