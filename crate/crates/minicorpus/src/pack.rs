//! Sequence packing and masked-token corruption.
//!
//! Tokenized units are concatenated as `d1 [sep] d2 [sep] ...` (a separator
//! after every document) and chunked into consecutive windows of a fixed
//! length; only the final window is padded, so total padding never exceeds
//! one window. Masking draws an independent decision per position from a
//! counter-based generator keyed by `(seed, sequence ordinal, position)`,
//! which makes batches reproducible under any execution order.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::seeding::{counter_hash, counter_unit};

/// Label value for positions not selected for corruption.
pub const IGNORE_LABEL: u32 = u32::MAX;

/// Provenance: where a run of document tokens begins inside a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanEntry {
    pub doc_ref: String,
    /// Position in the window where the run starts.
    pub window_start: usize,
    /// Offset within the source document's token list.
    pub doc_offset: usize,
}

/// A fixed-length window of the separator-joined token stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedSequence {
    pub ids: Vec<u32>,
    pub span_map: Vec<SpanEntry>,
    /// Trailing PAD count; nonzero only for the final window of a stream.
    pub pad_len: usize,
}

impl PackedSequence {
    pub fn content(&self) -> &[u32] {
        &self.ids[..self.ids.len() - self.pad_len]
    }
}

#[derive(Debug, Error)]
pub enum PackError {
    #[error("sequence length must be at least 2, got {0}")]
    SeqLenTooSmall(usize),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{path}: not a packed-sequence file (bad magic or version)")]
    BadMagic { path: String },
    #[error("{path}: truncated record at sequence {index}")]
    Truncated { path: String, index: usize },
}

/// Incremental packer; feed documents, then call [`Packer::finish`].
pub struct Packer {
    seq_len: usize,
    sep: u32,
    pad: u32,
    buf: Vec<u32>,
    spans: Vec<SpanEntry>,
    out: Vec<PackedSequence>,
}

impl Packer {
    pub fn new(seq_len: usize, sep: u32, pad: u32) -> Result<Self, PackError> {
        if seq_len < 2 {
            return Err(PackError::SeqLenTooSmall(seq_len));
        }
        Ok(Packer {
            seq_len,
            sep,
            pad,
            buf: Vec::with_capacity(seq_len),
            spans: Vec::new(),
            out: Vec::new(),
        })
    }

    /// Append one document's tokens followed by the document separator.
    pub fn push_doc(&mut self, doc_ref: &str, ids: &[u32]) {
        let mut offset = 0;
        while offset < ids.len() {
            if self.buf.len() == self.seq_len {
                self.flush_full();
            }
            let take = (self.seq_len - self.buf.len()).min(ids.len() - offset);
            self.spans.push(SpanEntry {
                doc_ref: doc_ref.to_string(),
                window_start: self.buf.len(),
                doc_offset: offset,
            });
            self.buf.extend_from_slice(&ids[offset..offset + take]);
            offset += take;
        }
        if self.buf.len() == self.seq_len {
            self.flush_full();
        }
        self.buf.push(self.sep);
    }

    fn flush_full(&mut self) {
        debug_assert_eq!(self.buf.len(), self.seq_len);
        self.out.push(PackedSequence {
            ids: std::mem::take(&mut self.buf),
            span_map: std::mem::take(&mut self.spans),
            pad_len: 0,
        });
        self.buf.reserve(self.seq_len);
    }

    /// Emit the final (possibly padded) window and return all sequences.
    pub fn finish(mut self) -> Vec<PackedSequence> {
        if self.buf.len() == self.seq_len {
            self.flush_full();
        } else if !self.buf.is_empty() {
            let pad_len = self.seq_len - self.buf.len();
            self.buf.resize(self.seq_len, self.pad);
            self.out.push(PackedSequence {
                ids: self.buf,
                span_map: self.spans,
                pad_len,
            });
        }
        self.out
    }
}

/// Pack a whole stream of `(doc_ref, token ids)` units.
pub fn concat_and_pack<I, S>(
    docs: I,
    seq_len: usize,
    sep: u32,
    pad: u32,
) -> Result<Vec<PackedSequence>, PackError>
where
    I: IntoIterator<Item = (S, Vec<u32>)>,
    S: AsRef<str>,
{
    let mut packer = Packer::new(seq_len, sep, pad)?;
    for (doc_ref, ids) in docs {
        packer.push_doc(doc_ref.as_ref(), &ids);
    }
    Ok(packer.finish())
}

/// Strip padding and re-concatenate; the inverse view used by the
/// losslessness checks.
pub fn unpack_stream(seqs: &[PackedSequence]) -> Vec<u32> {
    seqs.iter().flat_map(|s| s.content().iter().copied()).collect()
}

/// How selected positions are corrupted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskScheme {
    /// Every selected token becomes `[MASK]`.
    MaskOnly,
    /// 80% `[MASK]`, 10% uniform random vocab token, 10% unchanged.
    Bert801010,
}

impl MaskScheme {
    pub fn parse(s: &str) -> Option<MaskScheme> {
        match s {
            "mask-only" => Some(MaskScheme::MaskOnly),
            "bert-80-10-10" => Some(MaskScheme::Bert801010),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MaskScheme::MaskOnly => "mask-only",
            MaskScheme::Bert801010 => "bert-80-10-10",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MaskConfig {
    pub rate: f64,
    pub scheme: MaskScheme,
    pub seed: u64,
    /// When set, special-token positions (ids below `num_specials`) are not
    /// maskable. Off by default: separators and sentiment tokens are ordinary
    /// prediction targets.
    pub exempt_specials: bool,
    pub mask_id: u32,
    pub num_specials: u32,
    pub vocab_size: u32,
}

/// One training example: corrupted inputs plus per-position labels
/// ([`IGNORE_LABEL`] wherever the position was not selected).
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedExample {
    pub input_ids: Vec<u32>,
    pub labels: Vec<u32>,
    pub mask_rate: f64,
}

// Counter streams per position.
const STREAM_SELECT: u64 = 0;
const STREAM_ACTION: u64 = 1;
const STREAM_REPLACE: u64 = 2;

/// Corrupt one packed sequence. `ordinal` is the sequence's position in the
/// corpus stream and keys the per-position generator.
pub fn apply_masking(seq: &PackedSequence, cfg: &MaskConfig, ordinal: u64) -> MaskedExample {
    let content_len = seq.ids.len() - seq.pad_len;
    let mut input_ids = seq.ids.clone();
    let mut labels = vec![IGNORE_LABEL; seq.ids.len()];

    for i in 0..content_len {
        let id = seq.ids[i];
        if cfg.exempt_specials && id < cfg.num_specials {
            continue;
        }
        let u = counter_unit(cfg.seed, ordinal, i as u64, STREAM_SELECT);
        if u >= cfg.rate {
            continue;
        }
        labels[i] = id;
        match cfg.scheme {
            MaskScheme::MaskOnly => input_ids[i] = cfg.mask_id,
            MaskScheme::Bert801010 => {
                let action = counter_unit(cfg.seed, ordinal, i as u64, STREAM_ACTION);
                if action < 0.8 {
                    input_ids[i] = cfg.mask_id;
                } else if action < 0.9 {
                    let draw = counter_hash(cfg.seed, ordinal, i as u64, STREAM_REPLACE);
                    input_ids[i] = (draw % cfg.vocab_size as u64) as u32;
                }
                // else: keep the original token.
            }
        }
    }

    MaskedExample {
        input_ids,
        labels,
        mask_rate: cfg.rate,
    }
}

// ── Fixed-record binary format ──────────────────────────────────────────────

const MAGIC: &[u8; 4] = b"MCPK";
const VERSION: u32 = 1;

/// Header of a packed/masked record file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecordHeader {
    pub seq_len: u32,
    pub vocab_size: u32,
}

fn write_records<'a, W: Write>(
    w: &mut W,
    header: RecordHeader,
    rows: impl Iterator<Item = &'a [u32]>,
) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&header.seq_len.to_le_bytes())?;
    w.write_all(&header.vocab_size.to_le_bytes())?;
    for row in rows {
        debug_assert_eq!(row.len(), header.seq_len as usize);
        for id in row {
            w.write_all(&id.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Write packed sequences as fixed records of `seq_len` little-endian u32 ids.
pub fn write_packed_file(
    path: &Path,
    seqs: &[PackedSequence],
    header: RecordHeader,
) -> Result<(), PackError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_records(&mut w, header, seqs.iter().map(|s| s.ids.as_slice()))?;
    w.flush()?;
    Ok(())
}

/// Write masked examples as paired record files (`<prefix>.inputs.bin`,
/// `<prefix>.labels.bin`).
pub fn write_masked_files(
    prefix: &Path,
    examples: &[MaskedExample],
    header: RecordHeader,
) -> Result<(), PackError> {
    let inputs = std::path::PathBuf::from(format!("{}.inputs.bin", prefix.display()));
    let labels = std::path::PathBuf::from(format!("{}.labels.bin", prefix.display()));
    let mut w = BufWriter::new(fs::File::create(inputs)?);
    write_records(&mut w, header, examples.iter().map(|e| e.input_ids.as_slice()))?;
    w.flush()?;
    let mut w = BufWriter::new(fs::File::create(labels)?);
    write_records(&mut w, header, examples.iter().map(|e| e.labels.as_slice()))?;
    w.flush()?;
    Ok(())
}

/// Read a fixed-record file back as raw rows.
pub fn read_record_file(path: &Path) -> Result<(RecordHeader, Vec<Vec<u32>>), PackError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let bad = || PackError::BadMagic {
        path: path.display().to_string(),
    };
    if bytes.len() < 16 || &bytes[0..4] != MAGIC {
        return Err(bad());
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    if word(4) != VERSION {
        return Err(bad());
    }
    let header = RecordHeader {
        seq_len: word(8),
        vocab_size: word(12),
    };
    let record_bytes = header.seq_len as usize * 4;
    let body = &bytes[16..];
    if record_bytes == 0 || body.len() % record_bytes != 0 {
        return Err(PackError::Truncated {
            path: path.display().to_string(),
            index: if record_bytes == 0 { 0 } else { body.len() / record_bytes },
        });
    }
    let rows = body
        .chunks_exact(record_bytes)
        .map(|rec| {
            rec.chunks_exact(4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
                .collect()
        })
        .collect();
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SEP: u32 = 3;
    const PAD: u32 = 0;

    fn doc(n: usize, fill: u32) -> Vec<u32> {
        vec![fill; n]
    }

    #[test]
    fn two_docs_pack_into_two_windows() {
        // 100 + 1 + 100 + 1 = 202 tokens -> windows of 128 and 74.
        let seqs =
            concat_and_pack(vec![("a", doc(100, 10)), ("b", doc(100, 11))], 128, SEP, PAD)
                .unwrap();
        assert_eq!(seqs.len(), 2);
        assert_eq!(seqs[0].pad_len, 0);
        assert_eq!(seqs[1].content().len(), 74);
        assert_eq!(seqs[1].pad_len, 128 - 74);
        // Separator sits between the two documents' tokens.
        assert_eq!(seqs[0].ids[100], SEP);
        // And after the final document.
        assert_eq!(seqs[1].content().last(), Some(&SEP));
    }

    #[test]
    fn exact_length_doc_pads_only_for_its_separator() {
        let seqs = concat_and_pack(vec![("a", doc(128, 10))], 128, SEP, PAD).unwrap();
        assert_eq!(seqs.len(), 2);
        assert_eq!(seqs[0].pad_len, 0);
        assert_eq!(seqs[1].content(), &[SEP]);
        assert_eq!(seqs[1].pad_len, 127);
    }

    #[test]
    fn empty_stream_packs_to_nothing() {
        let seqs = concat_and_pack(Vec::<(&str, Vec<u32>)>::new(), 128, SEP, PAD).unwrap();
        assert!(seqs.is_empty());
    }

    #[test]
    fn packing_is_lossless() {
        let docs = vec![
            ("a", vec![1, 2, 3]),
            ("b", vec![4, 5, 6, 7, 8, 9, 10]),
            ("c", vec![]),
            ("d", vec![11; 19]),
        ];
        let mut expected = Vec::new();
        for (_, ids) in &docs {
            expected.extend_from_slice(ids);
            expected.push(SEP);
        }
        let seqs = concat_and_pack(docs, 8, SEP, PAD).unwrap();
        assert_eq!(unpack_stream(&seqs), expected);
        let pad_total: usize = seqs.iter().map(|s| s.pad_len).sum();
        assert!(pad_total <= 7);
    }

    #[test]
    fn span_map_tracks_document_offsets() {
        let seqs = concat_and_pack(vec![("x", doc(10, 1)), ("y", doc(10, 2))], 8, SEP, PAD)
            .unwrap();
        let first = &seqs[0].span_map;
        assert_eq!(first.len(), 1);
        assert_eq!(first[0].doc_ref, "x");
        assert_eq!(first[0].doc_offset, 0);
        let second = &seqs[1].span_map;
        assert_eq!(second[0].doc_ref, "x");
        assert_eq!(second[0].doc_offset, 8);
    }

    #[test]
    fn seq_len_below_two_is_rejected() {
        assert!(matches!(
            concat_and_pack(vec![("a", vec![1u32])], 1, SEP, PAD),
            Err(PackError::SeqLenTooSmall(1))
        ));
    }

    fn mask_cfg(rate: f64, scheme: MaskScheme) -> MaskConfig {
        MaskConfig {
            rate,
            scheme,
            seed: 42,
            exempt_specials: false,
            mask_id: 2,
            num_specials: 7,
            vocab_size: 1000,
        }
    }

    fn sample_seq() -> PackedSequence {
        PackedSequence {
            ids: vec![10, 11, 12, 13, 14, 15, PAD, PAD],
            span_map: vec![],
            pad_len: 2,
        }
    }

    #[test]
    fn zero_rate_selects_nothing() {
        let seq = sample_seq();
        let ex = apply_masking(&seq, &mask_cfg(0.0, MaskScheme::MaskOnly), 0);
        assert_eq!(ex.input_ids, seq.ids);
        assert!(ex.labels.iter().all(|&l| l == IGNORE_LABEL));
    }

    #[test]
    fn full_rate_masks_every_eligible_position() {
        let seq = sample_seq();
        let ex = apply_masking(&seq, &mask_cfg(1.0, MaskScheme::MaskOnly), 0);
        for i in 0..6 {
            assert_eq!(ex.input_ids[i], 2);
            assert_eq!(ex.labels[i], seq.ids[i]);
        }
        // PAD positions stay untouched and unlabeled.
        for i in 6..8 {
            assert_eq!(ex.input_ids[i], PAD);
            assert_eq!(ex.labels[i], IGNORE_LABEL);
        }
    }

    #[test]
    fn labels_mark_exactly_the_selected_positions() {
        let seq = PackedSequence {
            ids: (100..228).collect(),
            span_map: vec![],
            pad_len: 0,
        };
        let ex = apply_masking(&seq, &mask_cfg(0.3, MaskScheme::MaskOnly), 5);
        for i in 0..seq.ids.len() {
            let selected = ex.labels[i] != IGNORE_LABEL;
            assert_eq!(selected, ex.input_ids[i] == 2);
            if selected {
                assert_eq!(ex.labels[i], seq.ids[i]);
            } else {
                assert_eq!(ex.input_ids[i], seq.ids[i]);
            }
        }
    }

    #[test]
    fn masking_is_deterministic_and_ordinal_dependent() {
        let seq = sample_seq();
        let cfg = mask_cfg(0.5, MaskScheme::Bert801010);
        assert_eq!(apply_masking(&seq, &cfg, 3), apply_masking(&seq, &cfg, 3));
        assert_ne!(
            apply_masking(&seq, &cfg, 3).labels,
            apply_masking(&seq, &cfg, 4).labels
        );
    }

    #[test]
    fn special_exemption_flag_is_honored() {
        let seq = PackedSequence {
            ids: vec![3, 10, 4, 11, 5, 12, 13, 14],
            span_map: vec![],
            pad_len: 0,
        };
        let mut cfg = mask_cfg(1.0, MaskScheme::MaskOnly);
        cfg.exempt_specials = true;
        let ex = apply_masking(&seq, &cfg, 0);
        for (i, &id) in seq.ids.iter().enumerate() {
            if id < 7 {
                assert_eq!(ex.labels[i], IGNORE_LABEL);
                assert_eq!(ex.input_ids[i], id);
            } else {
                assert_eq!(ex.labels[i], id);
            }
        }
    }

    #[test]
    fn record_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("packed.bin");
        let seqs = concat_and_pack(vec![("a", doc(10, 1)), ("b", doc(5, 2))], 8, SEP, PAD)
            .unwrap();
        let header = RecordHeader {
            seq_len: 8,
            vocab_size: 100,
        };
        write_packed_file(&path, &seqs, header).unwrap();
        let (h, rows) = read_record_file(&path).unwrap();
        assert_eq!(h, header);
        assert_eq!(rows.len(), seqs.len());
        for (row, seq) in rows.iter().zip(&seqs) {
            assert_eq!(row, &seq.ids);
        }
        assert!(read_record_file(&dir.path().join("missing.bin")).is_err());
    }
}
