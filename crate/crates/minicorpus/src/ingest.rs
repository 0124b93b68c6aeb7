//! Corpus loading, sentence segmentation, and parser-input normalization.
//!
//! Raw corpora are plain-text files listed in a corpora manifest
//! (`name=path` lines, order significant). Loading is deterministic:
//! documents are yielded in manifest order, then file order, then in-file
//! order, with ids of the form `<corpus>:<path>:<ordinal>`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A raw corpus unit with provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub source: String,
    pub text: String,
}

/// One sentence of a document, produced by [`split_sentences`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub doc_ref: String,
    pub index: usize,
    pub text: String,
}

/// A sentence lower-cased, punctuation-stripped, and split into words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedSentence {
    pub tokens: Vec<String>,
    pub origin: SentenceRef,
}

/// Lightweight reference back to a sentence's position in the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRef {
    pub doc_ref: String,
    pub index: usize,
}

impl From<&Sentence> for SentenceRef {
    fn from(s: &Sentence) -> Self {
        SentenceRef {
            doc_ref: s.doc_ref.clone(),
            index: s.index,
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: invalid UTF-8 at byte offset {offset}")]
    Undecodable { path: PathBuf, offset: usize },
    #[error("corpora manifest line {line}: expected `name=path`, got {text:?}")]
    BadManifestLine { line: usize, text: String },
    #[error("corpora manifest lists {corpus}={path} more than once")]
    DuplicateEntry { corpus: String, path: String },
}

/// How documents are delimited within a corpus file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DocDelimiter {
    /// Blank lines separate documents (consecutive non-blank lines are one
    /// document).
    #[default]
    BlankLine,
    /// Every line is its own document.
    Line,
}

/// An ordered corpus-name-to-path mapping. Repeating a corpus name adds
/// another file to that corpus; file order follows manifest order.
#[derive(Debug, Clone, Default)]
pub struct CorporaManifest {
    entries: Vec<(String, PathBuf)>,
}

impl CorporaManifest {
    pub fn new(entries: Vec<(String, PathBuf)>) -> Self {
        CorporaManifest { entries }
    }

    /// Parse `name=path` lines. `#` starts a comment; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut entries: Vec<(String, PathBuf)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, path) = line.split_once('=').ok_or(IngestError::BadManifestLine {
                line: lineno + 1,
                text: raw.to_string(),
            })?;
            let name = name.trim().to_string();
            let path = path.trim().to_string();
            if name.is_empty() || path.is_empty() {
                return Err(IngestError::BadManifestLine {
                    line: lineno + 1,
                    text: raw.to_string(),
                });
            }
            if entries.iter().any(|(n, p)| *n == name && p.as_os_str() == path.as_str()) {
                return Err(IngestError::DuplicateEntry { corpus: name, path });
            }
            entries.push((name, PathBuf::from(path)));
        }
        Ok(CorporaManifest { entries })
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = fs::read_to_string(path).map_err(|source| IngestError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn entries(&self) -> &[(String, PathBuf)] {
        &self.entries
    }
}

/// Load every corpus in the manifest, in manifest order.
///
/// Documents that are empty after whitespace trimming are dropped. Ids are
/// `<corpus>:<path>:<ordinal>` with the ordinal counted per file.
pub fn load_corpus(
    manifest: &CorporaManifest,
    delimiter: DocDelimiter,
) -> Result<Vec<Document>, IngestError> {
    let mut docs = Vec::new();
    for (corpus, path) in manifest.entries() {
        let bytes = fs::read(path).map_err(|source| IngestError::Unreadable {
            path: path.clone(),
            source,
        })?;
        let text = std::str::from_utf8(&bytes).map_err(|e| IngestError::Undecodable {
            path: path.clone(),
            offset: e.valid_up_to(),
        })?;
        let file_label = path.to_string_lossy();
        let mut ordinal = 0usize;
        let mut push = |body: &str, docs: &mut Vec<Document>| {
            let trimmed = body.trim();
            if trimmed.is_empty() {
                return;
            }
            docs.push(Document {
                doc_id: format!("{corpus}:{file_label}:{ordinal}"),
                source: corpus.clone(),
                text: trimmed.to_string(),
            });
            ordinal += 1;
        };
        match delimiter {
            DocDelimiter::Line => {
                for line in text.lines() {
                    push(line, &mut docs);
                }
            }
            DocDelimiter::BlankLine => {
                let mut current = String::new();
                for line in text.lines() {
                    if line.trim().is_empty() {
                        push(&current, &mut docs);
                        current.clear();
                    } else {
                        if !current.is_empty() {
                            current.push('\n');
                        }
                        current.push_str(line);
                    }
                }
                push(&current, &mut docs);
            }
        }
    }
    Ok(docs)
}

/// Split a document into sentences on the literal dot.
///
/// Fragments are whitespace-trimmed and empty fragments dropped; indices are
/// assigned contiguously in order.
pub fn split_sentences(doc: &Document) -> Vec<Sentence> {
    doc.text
        .split('.')
        .map(str::trim)
        .filter(|frag| !frag.is_empty())
        .enumerate()
        .map(|(index, frag)| Sentence {
            doc_ref: doc.doc_id.clone(),
            index,
            text: frag.to_string(),
        })
        .collect()
}

/// Lower-case, strip punctuation, and split into words on the space token.
///
/// Tokens emptied by punctuation removal are dropped; stray whitespace inside
/// a token (tabs etc.) is removed so tokens never contain whitespace.
pub fn normalize_for_parsing(sentence: &Sentence) -> NormalizedSentence {
    let tokens = sentence
        .text
        .split(' ')
        .filter_map(|word| {
            let token: String = word
                .to_lowercase()
                .chars()
                .filter(|c| !is_punctuation(*c) && !c.is_whitespace())
                .collect();
            (!token.is_empty()).then_some(token)
        })
        .collect();
    NormalizedSentence {
        tokens,
        origin: SentenceRef::from(sentence),
    }
}

/// The punctuation set stripped by normalization: ASCII punctuation
/// `!"#$%&'()*+,-./:;<=>?@[\]^_`{|}~` plus every Unicode P* character.
pub fn is_punctuation(c: char) -> bool {
    const ASCII_PUNCT: &str = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";
    if c.is_ascii() {
        return ASCII_PUNCT.contains(c);
    }
    static UNICODE_PUNCT: std::sync::OnceLock<regex::Regex> = std::sync::OnceLock::new();
    let re = UNICODE_PUNCT.get_or_init(|| regex::Regex::new(r"\p{P}").unwrap());
    let mut buf = [0u8; 4];
    re.is_match(c.encode_utf8(&mut buf))
}

impl fmt::Display for NormalizedSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tokens.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn doc(text: &str) -> Document {
        Document {
            doc_id: "t:f:0".into(),
            source: "t".into(),
            text: text.into(),
        }
    }

    #[test]
    fn blank_line_delimiting_yields_two_documents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        fs::write(&path, "Hello.\n\nBye.\n").unwrap();
        let manifest = CorporaManifest::new(vec![("c".into(), path)]);
        let docs = load_corpus(&manifest, DocDelimiter::BlankLine).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].text, "Hello.");
        assert_eq!(docs[1].text, "Bye.");
        assert!(docs[0].doc_id.ends_with(":0"));
        assert!(docs[1].doc_id.ends_with(":1"));
    }

    #[test]
    fn empty_file_yields_no_documents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.txt");
        fs::write(&path, "").unwrap();
        let manifest = CorporaManifest::new(vec![("c".into(), path)]);
        let docs = load_corpus(&manifest, DocDelimiter::BlankLine).unwrap();
        assert!(docs.is_empty());
    }

    #[test]
    fn manifest_order_wins_over_listing_order() {
        // Two files registered in reverse name order: manifest order decides.
        let dir = tempfile::tempdir().unwrap();
        let pa = dir.path().join("a.txt");
        let pb = dir.path().join("b.txt");
        fs::write(&pa, "from a.").unwrap();
        fs::write(&pb, "from b.").unwrap();
        let manifest =
            CorporaManifest::new(vec![("second".into(), pb), ("first".into(), pa)]);
        let docs = load_corpus(&manifest, DocDelimiter::BlankLine).unwrap();
        assert_eq!(docs.len(), 2);
        assert!(docs[0].doc_id.starts_with("second:"));
        assert!(docs[1].doc_id.starts_with("first:"));
    }

    #[test]
    fn undecodable_bytes_report_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(b"ok so far \xff\xfe more").unwrap();
        drop(f);
        let manifest = CorporaManifest::new(vec![("c".into(), path)]);
        let err = load_corpus(&manifest, DocDelimiter::BlankLine).unwrap_err();
        match err {
            IngestError::Undecodable { offset, .. } => assert_eq!(offset, 10),
            other => panic!("expected Undecodable, got {other}"),
        }
    }

    #[test]
    fn missing_file_is_fatal_and_names_the_path() {
        let manifest =
            CorporaManifest::new(vec![("c".into(), PathBuf::from("/nonexistent/x.txt"))]);
        let err = load_corpus(&manifest, DocDelimiter::BlankLine).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.txt"));
    }

    #[test]
    fn split_on_dot() {
        let got = split_sentences(&doc("a b. c d."));
        let texts: Vec<&str> = got.iter().map(|s| s.text.as_str()).collect();
        assert_eq!(texts, vec!["a b", "c d"]);
        assert_eq!(got[0].index, 0);
        assert_eq!(got[1].index, 1);
    }

    #[test]
    fn split_without_delimiter_is_identity() {
        let got = split_sentences(&doc("no delimiter"));
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].text, "no delimiter");
    }

    #[test]
    fn split_drops_empty_fragments() {
        let got = split_sentences(&doc("x.. y."));
        let texts: Vec<&str> = got.iter().map(|s| s.text.as_str()).collect();
        assert_eq!(texts, vec!["x", "y"]);
    }

    #[test]
    fn normalization_lowercases_and_strips_punctuation() {
        let s = Sentence {
            doc_ref: "d".into(),
            index: 0,
            text: "They are PLACED, into!".into(),
        };
        let norm = normalize_for_parsing(&s);
        assert_eq!(norm.tokens, vec!["they", "are", "placed", "into"]);
    }

    #[test]
    fn normalization_identity_and_empty_cases() {
        let mk = |text: &str| Sentence {
            doc_ref: "d".into(),
            index: 0,
            text: text.into(),
        };
        assert_eq!(normalize_for_parsing(&mk("abc")).tokens, vec!["abc"]);
        assert!(normalize_for_parsing(&mk("!!!")).tokens.is_empty());
    }

    #[test]
    fn manifest_rejects_duplicates_and_bad_lines() {
        assert!(CorporaManifest::parse("a=x\na=x\n").is_err());
        assert!(CorporaManifest::parse("just a line\n").is_err());
        let ok = CorporaManifest::parse("# comment\na=x\n\na=y\n").unwrap();
        assert_eq!(ok.entries().len(), 2);
    }
}
