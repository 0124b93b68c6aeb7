//! Pipeline configuration: reported defaults, a key=value file format, and
//! flag overrides (flags win over the file, the file over defaults).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::pack::MaskScheme;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: expected `key = value`, got {text:?}")]
    BadLine { line: usize, text: String },
    #[error("config key {key}: cannot parse {value:?}: {message}")]
    BadValue {
        key: String,
        value: String,
        message: String,
    },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("config invariant violated: {0}")]
    Invalid(String),
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

/// Fully resolved pipeline settings; defaults are the recipe's reported
/// values.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub vocab_size: usize,
    pub seq_len: usize,
    pub mask_rate: f64,
    pub mask_scheme: MaskScheme,
    pub exempt_specials: bool,
    pub sentiment_cap: usize,
    pub brak_n: usize,
    pub brak_min_len: usize,
    pub omg_vocab_size: u32,
    pub omg_max_len: usize,
    pub omg_train_frac: f64,
    pub ngram_order: usize,
    pub ngram_alpha: f64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            vocab_size: 10_000,
            seq_len: 128,
            mask_rate: 0.15,
            mask_scheme: MaskScheme::MaskOnly,
            exempt_specials: false,
            sentiment_cap: 2500,
            brak_n: 15_030,
            brak_min_len: 3,
            omg_vocab_size: 4035,
            omg_max_len: 15,
            omg_train_frac: 0.95,
            ngram_order: 3,
            ngram_alpha: 0.1,
            seed: 42,
        }
    }
}

impl PipelineConfig {
    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            value.parse().map_err(|e: T::Err| ConfigError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
                message: e.to_string(),
            })
        }
        match key {
            "vocab_size" => self.vocab_size = parse(key, value)?,
            "seq_len" => self.seq_len = parse(key, value)?,
            "mask_rate" => self.mask_rate = parse(key, value)?,
            "mask_scheme" => {
                self.mask_scheme =
                    MaskScheme::parse(value).ok_or_else(|| ConfigError::BadValue {
                        key: key.to_string(),
                        value: value.to_string(),
                        message: "expected mask-only or bert-80-10-10".to_string(),
                    })?
            }
            "exempt_specials" => self.exempt_specials = parse(key, value)?,
            "sentiment_cap" => self.sentiment_cap = parse(key, value)?,
            "brak_n" => self.brak_n = parse(key, value)?,
            "brak_min_len" => self.brak_min_len = parse(key, value)?,
            "omg_vocab_size" => self.omg_vocab_size = parse(key, value)?,
            "omg_max_len" => self.omg_max_len = parse(key, value)?,
            "omg_train_frac" => self.omg_train_frac = parse(key, value)?,
            "ngram_order" => self.ngram_order = parse(key, value)?,
            "ngram_alpha" => self.ngram_alpha = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Parse a key=value config file over the current settings.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = fs::read_to_string(path)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::BadLine {
                line: lineno + 1,
                text: raw.to_string(),
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.seq_len < 2 {
            return fail("seq_len must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.mask_rate) {
            return fail("mask_rate must lie in [0, 1]");
        }
        if !(self.omg_train_frac > 0.0 && self.omg_train_frac < 1.0) {
            return fail("omg_train_frac must lie strictly between 0 and 1");
        }
        if self.brak_min_len < 1 {
            return fail("brak_min_len must be at least 1");
        }
        if self.omg_vocab_size < 2 {
            return fail("omg_vocab_size must be at least 2");
        }
        if self.omg_max_len < 1 {
            return fail("omg_max_len must be at least 1");
        }
        if self.ngram_order < 1 {
            return fail("ngram_order must be at least 1");
        }
        if !(self.ngram_alpha > 0.0) {
            return fail("ngram_alpha must be positive");
        }
        Ok(())
    }

    /// Canonical key-value rendering (sorted keys) for manifests and
    /// hashing.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("vocab_size".into(), self.vocab_size.to_string());
        m.insert("seq_len".into(), self.seq_len.to_string());
        m.insert("mask_rate".into(), self.mask_rate.to_string());
        m.insert("mask_scheme".into(), self.mask_scheme.name().to_string());
        m.insert("exempt_specials".into(), self.exempt_specials.to_string());
        m.insert("sentiment_cap".into(), self.sentiment_cap.to_string());
        m.insert("brak_n".into(), self.brak_n.to_string());
        m.insert("brak_min_len".into(), self.brak_min_len.to_string());
        m.insert("omg_vocab_size".into(), self.omg_vocab_size.to_string());
        m.insert("omg_max_len".into(), self.omg_max_len.to_string());
        m.insert("omg_train_frac".into(), self.omg_train_frac.to_string());
        m.insert("ngram_order".into(), self.ngram_order.to_string());
        m.insert("ngram_alpha".into(), self.ngram_alpha.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m
    }
}
