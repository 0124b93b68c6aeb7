//! Deterministic fixture-corpus generation shared by the integration tests.
//!
//! Text is synthesized from a syllable-built lexicon with a Zipfian word
//! distribution, so fixtures of any size are reproducible from a seed and
//! offer enough pair diversity to train full-size tokenizers.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ONSETS: &[&str] = &[
    "b", "br", "c", "ch", "cl", "d", "dr", "f", "fl", "g", "gr", "h", "j", "k", "l", "m", "n",
    "p", "pl", "pr", "qu", "r", "s", "sh", "sl", "sp", "st", "t", "th", "tr", "v", "w", "y", "z",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ea", "ou", "oo"];
const CODAS: &[&str] = &[
    "", "b", "ck", "d", "g", "l", "ll", "m", "n", "nd", "ng", "nt", "p", "r", "rd", "s", "sh",
    "ss", "st", "t", "th",
];

fn syllables() -> Vec<String> {
    let mut out = Vec::new();
    for o in ONSETS {
        for v in VOWELS {
            for c in CODAS {
                out.push(format!("{o}{v}{c}"));
            }
        }
    }
    out
}

/// Seeded text synthesizer over a fixed lexicon.
pub struct TextGen {
    rng: ChaCha8Rng,
    words: Vec<String>,
    cumulative: Vec<f64>,
}

impl TextGen {
    pub fn new(seed: u64) -> Self {
        let syl = syllables();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x74657874);
        let mut words: Vec<String> = syl.iter().take(3000).cloned().collect();
        for _ in 0..5000 {
            let a = &syl[rng.random_range(0..syl.len())];
            let b = &syl[rng.random_range(0..syl.len())];
            words.push(format!("{a}{b}"));
        }
        let mut cumulative = Vec::with_capacity(words.len());
        let mut total = 0.0;
        for k in 0..words.len() {
            total += 1.0 / (k as f64 + 1.0).powf(0.8);
            cumulative.push(total);
        }
        TextGen {
            rng,
            words,
            cumulative,
        }
    }

    pub fn word(&mut self) -> &str {
        let target = self.rng.random::<f64>() * self.cumulative.last().unwrap();
        let idx = self.cumulative.partition_point(|&c| c <= target);
        &self.words[idx.min(self.words.len() - 1)]
    }

    /// One sentence of 4..=12 words ending with a dot.
    pub fn sentence(&mut self) -> String {
        let n = self.rng.random_range(4..=12);
        let mut out = String::new();
        for i in 0..n {
            if i > 0 {
                out.push(' ');
            }
            let w = self.word().to_string();
            out.push_str(&w);
        }
        out.push('.');
        out
    }

    /// One document of 1..=4 sentences.
    pub fn document(&mut self) -> String {
        let n = self.rng.random_range(1..=4);
        (0..n).map(|_| self.sentence()).collect::<Vec<_>>().join(" ")
    }

    /// Blank-line-delimited documents totalling at least `target_bytes`.
    pub fn corpus(&mut self, target_bytes: usize) -> String {
        let mut out = String::new();
        while out.len() < target_bytes {
            out.push_str(&self.document());
            out.push_str("\n\n");
        }
        out
    }

    /// Plain sentences (no document structure), one per line.
    pub fn sentences(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.sentence()).collect()
    }
}
