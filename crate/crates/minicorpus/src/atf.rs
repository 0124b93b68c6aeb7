//! Automatic task formation: mine shallow surface patterns from the corpus
//! and emit question-answer pairs and sentiment-tagged sentences for
//! appending to the training data.
//!
//! Three QA pattern families fire on single sentences:
//!
//! * birth date — `<Name> (born <DD> <Month> <YYYY>)`
//! * nationality & profession — `<Name> (born ...) is a <Profession> from
//!   <Nationality>`
//! * discovery / founding / naming — `<Name> was discovered|founded in
//!   <Year>`, `<Name> was named after <Name>`
//!
//! A name is the maximal run of capitalized words (internal `of`, `the`,
//! `de` allowed) immediately before the anchor. Sentiment labels come from
//! fixed positive/negative surface-pattern lists; sentences matching both
//! sides are skipped.

use std::fmt;
use std::sync::OnceLock;

use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bpe::{SpecialRole, SpecialTokens};
use crate::ingest::{Sentence, SentenceRef};
use crate::seeding::derive_rng;

const NAME: &str = r"[A-Z][A-Za-z]*(?: (?:(?:of|the|de) )*[A-Z][A-Za-z]*)*";

/// Which surface pattern produced a QA pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QaKind {
    BirthDate,
    Nationality,
    Profession,
    Discovery,
    Founding,
    Naming,
}

/// A generated question-answer pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QaPair {
    pub question: String,
    pub answer: String,
    pub source: SentenceRef,
    pub kind: QaKind,
}

impl QaPair {
    /// Rendered training form: `<question> [SEP] <answer>`.
    pub fn rendered(&self, specials: &SpecialTokens) -> String {
        format!(
            "{} {} {}",
            self.question,
            specials.literal(SpecialRole::SepQa),
            self.answer
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sentiment {
    Positive,
    Negative,
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sentiment::Positive => write!(f, "positive"),
            Sentiment::Negative => write!(f, "negative"),
        }
    }
}

/// Outcome of lexicon classification for one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentimentClass {
    Positive,
    Negative,
    /// Both lexicons matched; the sentence is skipped downstream.
    Mixed,
    None,
}

/// A sentence that matched exactly one side of the lexicon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentimentRecord {
    pub sentence: String,
    pub label: Sentiment,
    /// The lexicon entry that fired (first in list order).
    pub matched: String,
    pub source: SentenceRef,
}

impl SentimentRecord {
    /// Rendered training form: `<sentence> <sentiment-token> <label-word>`.
    pub fn rendered(&self, specials: &SpecialTokens) -> String {
        let role = match self.label {
            Sentiment::Positive => SpecialRole::SentPos,
            Sentiment::Negative => SpecialRole::SentNeg,
        };
        format!("{} {} {}", self.sentence, specials.literal(role), self.label)
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: pattern outside a [positive]/[negative] section")]
    NoSection { line: usize },
    #[error("line {line}: pattern {pattern:?} does not compile: {message}")]
    BadPattern {
        line: usize,
        pattern: String,
        message: String,
    },
}

/// Positive/negative surface patterns. Entries are matched case-insensitively
/// at word boundaries; the literal `[a-z]+` acts as a one-word wildcard.
#[derive(Debug, Clone)]
pub struct SentimentLexicon {
    positive: Vec<(String, Regex)>,
    negative: Vec<(String, Regex)>,
}

impl Default for SentimentLexicon {
    /// The built-in lists: 15 negative and 11 positive entries.
    fn default() -> Self {
        let negative = [
            "not good",
            "not great",
            "not like",
            "didn't like",
            "not [a-z]+ great",
            "not [a-z]+ good",
            "horrible",
            "terrible",
            "hate",
            "hated",
            "bad",
            "disliked",
            "annoying",
            "frustrating",
            "worst",
        ];
        let positive = [
            "loved",
            "not bad",
            "not [a-z]+ bad",
            "great",
            "fantastic",
            "incredible",
            "terrific",
            "gorgeous",
            "enjoyed",
            "enjoy",
            "beautiful",
        ];
        SentimentLexicon::from_entries(&positive, &negative)
            .expect("built-in lexicon compiles")
    }
}

impl SentimentLexicon {
    pub fn from_entries(positive: &[&str], negative: &[&str]) -> Result<Self, LexiconError> {
        let compile_all = |entries: &[&str]| -> Result<Vec<(String, Regex)>, LexiconError> {
            entries
                .iter()
                .map(|e| Ok((e.to_string(), compile_entry(e, 0)?)))
                .collect()
        };
        Ok(SentimentLexicon {
            positive: compile_all(positive)?,
            negative: compile_all(negative)?,
        })
    }

    /// Parse the plain-text format: one pattern per line under a
    /// `[positive]` or `[negative]` section header.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut positive: Vec<(String, Regex)> = Vec::new();
        let mut negative: Vec<(String, Regex)> = Vec::new();
        let mut section: Option<Sentiment> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "[positive]" => section = Some(Sentiment::Positive),
                "[negative]" => section = Some(Sentiment::Negative),
                pattern => {
                    let re = compile_entry(pattern, lineno + 1)?;
                    match section {
                        Some(Sentiment::Positive) => positive.push((pattern.into(), re)),
                        Some(Sentiment::Negative) => negative.push((pattern.into(), re)),
                        None => return Err(LexiconError::NoSection { line: lineno + 1 }),
                    }
                }
            }
        }
        Ok(SentimentLexicon { positive, negative })
    }

    pub fn positive_entries(&self) -> impl Iterator<Item = &str> {
        self.positive.iter().map(|(e, _)| e.as_str())
    }

    pub fn negative_entries(&self) -> impl Iterator<Item = &str> {
        self.negative.iter().map(|(e, _)| e.as_str())
    }

    fn first_match<'a>(entries: &'a [(String, Regex)], text: &str) -> Option<&'a str> {
        entries
            .iter()
            .find(|(_, re)| re.is_match(text))
            .map(|(e, _)| e.as_str())
    }

    pub fn match_positive(&self, text: &str) -> Option<&str> {
        Self::first_match(&self.positive, text)
    }

    pub fn match_negative(&self, text: &str) -> Option<&str> {
        Self::first_match(&self.negative, text)
    }
}

/// Escape a lexicon entry, keeping `[a-z]+` as a wildcard, and anchor it at
/// word boundaries.
fn compile_entry(entry: &str, line: usize) -> Result<Regex, LexiconError> {
    const WILDCARD: &str = "[a-z]+";
    let body = entry
        .split(WILDCARD)
        .map(regex::escape)
        .collect::<Vec<_>>()
        .join(WILDCARD);
    Regex::new(&format!(r"(?i)\b(?:{body})\b")).map_err(|e| LexiconError::BadPattern {
        line,
        pattern: entry.to_string(),
        message: e.to_string(),
    })
}

/// `<Name> (born <DD> <Month> <YYYY>)` → "On what date was `<Name>` born?"
pub fn extract_birthdate_qa(sentence: &Sentence) -> Option<QaPair> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(&format!(
            r"({NAME}) \(born ([0-9]{{1,2}}) ([A-Z][a-z]+) ([0-9]{{4}})\)"
        ))
        .unwrap()
    });
    let caps = re.captures(&sentence.text)?;
    let name = &caps[1];
    Some(QaPair {
        question: format!("On what date was {name} born?"),
        answer: format!("{} {} {}", &caps[2], &caps[3], &caps[4]),
        source: SentenceRef::from(sentence),
        kind: QaKind::BirthDate,
    })
}

/// `<Name> (born ...) is a <Profession> from <Nationality>` → a
/// nationality pair and a profession pair.
pub fn extract_bio_qa(sentence: &Sentence) -> Vec<QaPair> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(&format!(
            r"({NAME}) \(born [^)]*\) is an? ((?:[a-z]+ )*?[a-z]+) from ({NAME})"
        ))
        .unwrap()
    });
    let Some(caps) = re.captures(&sentence.text) else {
        return Vec::new();
    };
    let name = &caps[1];
    let profession = &caps[2];
    let nationality = &caps[3];
    vec![
        QaPair {
            question: format!("Where is {name} from?"),
            answer: nationality.to_string(),
            source: SentenceRef::from(sentence),
            kind: QaKind::Nationality,
        },
        QaPair {
            question: format!("What is the profession of {name}?"),
            answer: profession.to_string(),
            source: SentenceRef::from(sentence),
            kind: QaKind::Profession,
        },
    ]
}

/// Discovery, founding, and naming patterns; the first family that fires
/// wins.
pub fn extract_event_qa(sentence: &Sentence) -> Option<QaPair> {
    static DISCOVERED: OnceLock<Regex> = OnceLock::new();
    static FOUNDED: OnceLock<Regex> = OnceLock::new();
    static NAMED: OnceLock<Regex> = OnceLock::new();
    let discovered = DISCOVERED.get_or_init(|| {
        Regex::new(&format!(r"({NAME}) was discovered in ([0-9]{{1,4}})\b")).unwrap()
    });
    let founded = FOUNDED.get_or_init(|| {
        Regex::new(&format!(r"({NAME}) was founded in ([0-9]{{1,4}})\b")).unwrap()
    });
    let named = NAMED
        .get_or_init(|| Regex::new(&format!(r"({NAME}) was named after ({NAME})")).unwrap());

    if let Some(caps) = discovered.captures(&sentence.text) {
        return Some(QaPair {
            question: format!("When was {} discovered?", &caps[1]),
            answer: caps[2].to_string(),
            source: SentenceRef::from(sentence),
            kind: QaKind::Discovery,
        });
    }
    if let Some(caps) = founded.captures(&sentence.text) {
        return Some(QaPair {
            question: format!("When was {} founded?", &caps[1]),
            answer: caps[2].to_string(),
            source: SentenceRef::from(sentence),
            kind: QaKind::Founding,
        });
    }
    if let Some(caps) = named.captures(&sentence.text) {
        return Some(QaPair {
            question: format!("What was {} named after?", &caps[1]),
            answer: caps[2].to_string(),
            source: SentenceRef::from(sentence),
            kind: QaKind::Naming,
        });
    }
    None
}

/// Classify one sentence against the lexicon.
pub fn classify_sentiment(sentence: &Sentence, lexicon: &SentimentLexicon) -> SentimentClass {
    let pos = lexicon.match_positive(&sentence.text).is_some();
    let neg = lexicon.match_negative(&sentence.text).is_some();
    match (pos, neg) {
        (true, true) => SentimentClass::Mixed,
        (true, false) => SentimentClass::Positive,
        (false, true) => SentimentClass::Negative,
        (false, false) => SentimentClass::None,
    }
}

/// Every pattern kind an augmentation record can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    BirthDate,
    Nationality,
    Profession,
    Discovery,
    Founding,
    Naming,
    SentimentPositive,
    SentimentNegative,
}

impl From<QaKind> for RecordKind {
    fn from(k: QaKind) -> Self {
        match k {
            QaKind::BirthDate => RecordKind::BirthDate,
            QaKind::Nationality => RecordKind::Nationality,
            QaKind::Profession => RecordKind::Profession,
            QaKind::Discovery => RecordKind::Discovery,
            QaKind::Founding => RecordKind::Founding,
            QaKind::Naming => RecordKind::Naming,
        }
    }
}

/// One augmentation output line: the rendered text that enters the packing
/// pipeline, plus provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationRecord {
    pub kind: RecordKind,
    pub text: String,
    pub source_doc: String,
    pub source_index: usize,
}

/// Result of a full augmentation pass.
#[derive(Debug, Clone)]
pub struct AugmentationOutput {
    pub records: Vec<AugmentationRecord>,
    pub qa_count: usize,
    /// Sentences that matched exactly one lexicon side, before capping.
    pub positive_eligible: usize,
    pub negative_eligible: usize,
}

/// Run every extractor over the sentence stream.
///
/// QA output is uncapped and kept in corpus order; sentiment records are
/// reservoir-sampled down to `cap` per label under the seed. `Mixed` and
/// unmatched sentences contribute nothing.
pub fn augment_corpus<'a, I>(
    sentences: I,
    lexicon: &SentimentLexicon,
    cap: usize,
    seed: u64,
    specials: &SpecialTokens,
) -> AugmentationOutput
where
    I: IntoIterator<Item = &'a Sentence>,
{
    let mut records: Vec<AugmentationRecord> = Vec::new();
    let mut pos_rng = derive_rng(seed, "atf/sentiment/positive");
    let mut neg_rng = derive_rng(seed, "atf/sentiment/negative");
    let mut positive = Reservoir::new(cap);
    let mut negative = Reservoir::new(cap);

    let push_qa = |pair: QaPair, records: &mut Vec<AugmentationRecord>| {
        records.push(AugmentationRecord {
            kind: pair.kind.into(),
            text: pair.rendered(specials),
            source_doc: pair.source.doc_ref.clone(),
            source_index: pair.source.index,
        });
    };

    for sentence in sentences {
        if let Some(pair) = extract_birthdate_qa(sentence) {
            push_qa(pair, &mut records);
        }
        for pair in extract_bio_qa(sentence) {
            push_qa(pair, &mut records);
        }
        if let Some(pair) = extract_event_qa(sentence) {
            push_qa(pair, &mut records);
        }
        match classify_sentiment(sentence, lexicon) {
            SentimentClass::Positive => {
                let matched = lexicon.match_positive(&sentence.text).unwrap().to_string();
                positive.offer(
                    SentimentRecord {
                        sentence: sentence.text.clone(),
                        label: Sentiment::Positive,
                        matched,
                        source: SentenceRef::from(sentence),
                    },
                    &mut pos_rng,
                );
            }
            SentimentClass::Negative => {
                let matched = lexicon.match_negative(&sentence.text).unwrap().to_string();
                negative.offer(
                    SentimentRecord {
                        sentence: sentence.text.clone(),
                        label: Sentiment::Negative,
                        matched,
                        source: SentenceRef::from(sentence),
                    },
                    &mut neg_rng,
                );
            }
            SentimentClass::Mixed | SentimentClass::None => {}
        }
    }

    let qa_count = records.len();
    let positive_eligible = positive.seen;
    let negative_eligible = negative.seen;
    for rec in positive.items.into_iter().chain(negative.items) {
        records.push(AugmentationRecord {
            kind: match rec.label {
                Sentiment::Positive => RecordKind::SentimentPositive,
                Sentiment::Negative => RecordKind::SentimentNegative,
            },
            text: rec.rendered(specials),
            source_doc: rec.source.doc_ref,
            source_index: rec.source.index,
        });
    }

    AugmentationOutput {
        records,
        qa_count,
        positive_eligible,
        negative_eligible,
    }
}

/// Uniform reservoir sampler (algorithm R).
struct Reservoir<T> {
    cap: usize,
    seen: usize,
    items: Vec<T>,
}

impl<T> Reservoir<T> {
    fn new(cap: usize) -> Self {
        Reservoir {
            cap,
            seen: 0,
            items: Vec::new(),
        }
    }

    fn offer<R: Rng>(&mut self, item: T, rng: &mut R) {
        self.seen += 1;
        if self.items.len() < self.cap {
            self.items.push(item);
        } else if self.cap > 0 {
            let j = rng.random_range(0..self.seen);
            if j < self.cap {
                self.items[j] = item;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(text: &str) -> Sentence {
        Sentence {
            doc_ref: "d:0".into(),
            index: 0,
            text: text.into(),
        }
    }

    #[test]
    fn birthdate_pattern_fires_on_full_date() {
        let pair =
            extract_birthdate_qa(&sent("Ada Lovelace (born 10 December 1815) was a writer"))
                .unwrap();
        assert_eq!(pair.question, "On what date was Ada Lovelace born?");
        assert_eq!(pair.answer, "10 December 1815");
        assert_eq!(pair.kind, QaKind::BirthDate);
    }

    #[test]
    fn birthdate_pattern_requires_all_fields() {
        assert!(extract_birthdate_qa(&sent("She was born yesterday")).is_none());
        assert!(extract_birthdate_qa(&sent("X (born December 1815)")).is_none());
    }

    #[test]
    fn bio_pattern_yields_two_pairs() {
        let pairs = extract_bio_qa(&sent("Jo Vik (born 1 May 1990) is a chemist from Norway"));
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].question, "Where is Jo Vik from?");
        assert_eq!(pairs[0].answer, "Norway");
        assert_eq!(pairs[0].kind, QaKind::Nationality);
        assert_eq!(pairs[1].question, "What is the profession of Jo Vik?");
        assert_eq!(pairs[1].answer, "chemist");
        assert_eq!(pairs[1].kind, QaKind::Profession);
    }

    #[test]
    fn bio_pattern_requires_both_fields() {
        assert!(extract_bio_qa(&sent("Jo Vik is tall")).is_empty());
        assert!(extract_bio_qa(&sent("Jo Vik (born 1 May 1990) is a chemist")).is_empty());
    }

    #[test]
    fn event_patterns_fire_per_verb() {
        let p = extract_event_qa(&sent("Neon was discovered in 1898")).unwrap();
        assert_eq!(p.question, "When was Neon discovered?");
        assert_eq!(p.answer, "1898");
        assert_eq!(p.kind, QaKind::Discovery);

        let p = extract_event_qa(&sent("Rome was founded in 753")).unwrap();
        assert_eq!(p.question, "When was Rome founded?");
        assert_eq!(p.answer, "753");
        assert_eq!(p.kind, QaKind::Founding);

        let p = extract_event_qa(&sent("The Tower was named after Gustave Eiffel")).unwrap();
        assert_eq!(p.question, "What was The Tower named after?");
        assert_eq!(p.answer, "Gustave Eiffel");
        assert_eq!(p.kind, QaKind::Naming);

        assert!(extract_event_qa(&sent("Nothing was lost in 1900")).is_none());
    }

    #[test]
    fn name_capture_allows_internal_connectors() {
        let p = extract_event_qa(&sent("the Statue of Liberty was discovered in 1886")).unwrap();
        assert_eq!(p.question, "When was Statue of Liberty discovered?");
    }

    #[test]
    fn default_lexicon_matches_appendix_counts() {
        let lex = SentimentLexicon::default();
        assert_eq!(lex.negative_entries().count(), 15);
        assert_eq!(lex.positive_entries().count(), 11);
    }

    #[test]
    fn sentiment_classification_examples() {
        let lex = SentimentLexicon::default();
        assert_eq!(
            classify_sentiment(&sent("that movie was terrific"), &lex),
            SentimentClass::Positive
        );
        // "good" alone is not a positive entry, so this is purely negative.
        assert_eq!(
            classify_sentiment(&sent("it was not good"), &lex),
            SentimentClass::Negative
        );
        assert_eq!(
            classify_sentiment(&sent("great but terrible"), &lex),
            SentimentClass::Mixed
        );
        assert_eq!(
            classify_sentiment(&sent("the sky is blue"), &lex),
            SentimentClass::None
        );
        // "bad" is a negative entry inside the positive "not bad" pattern,
        // so both sides fire and the sentence is skipped.
        assert_eq!(
            classify_sentiment(&sent("the film was not bad"), &lex),
            SentimentClass::Mixed
        );
    }

    #[test]
    fn wildcard_entries_span_one_word() {
        let lex = SentimentLexicon::default();
        assert_eq!(
            classify_sentiment(&sent("it was not very good"), &lex),
            SentimentClass::Negative
        );
        assert_eq!(
            classify_sentiment(&sent("it was not AT good"), &lex),
            SentimentClass::Negative
        );
    }

    #[test]
    fn matching_is_case_insensitive_at_word_boundaries() {
        let lex = SentimentLexicon::default();
        assert_eq!(
            classify_sentiment(&sent("TERRIFIC stuff"), &lex),
            SentimentClass::Positive
        );
        // Substrings of longer words do not count.
        assert_eq!(
            classify_sentiment(&sent("terrifically unrelated"), &lex),
            SentimentClass::None
        );
    }

    #[test]
    fn augment_counts_planted_patterns() {
        let sentences: Vec<Sentence> = vec![
            sent("Ada Lovelace (born 10 December 1815) was a writer"),
            sent("Alan Turing (born 23 June 1912) was a mathematician"),
            sent("Grace Hopper (born 9 December 1906) was an admiral"),
            sent("nothing to see here"),
        ];
        let out = augment_corpus(
            sentences.iter(),
            &SentimentLexicon::default(),
            10,
            7,
            &SpecialTokens::default(),
        );
        assert_eq!(out.qa_count, 3);
        assert_eq!(out.records.len(), 3);
        assert!(out.records[0].text.contains(" [SEP] "));
        assert_eq!(out.records[0].kind, RecordKind::BirthDate);
    }

    #[test]
    fn sentiment_cap_binds_exactly() {
        let sentences: Vec<Sentence> = (0..10)
            .map(|i| Sentence {
                doc_ref: "d".into(),
                index: i,
                text: format!("speaker {i} said it was terrific"),
            })
            .collect();
        let out = augment_corpus(
            sentences.iter(),
            &SentimentLexicon::default(),
            5,
            7,
            &SpecialTokens::default(),
        );
        assert_eq!(out.positive_eligible, 10);
        let positives = out
            .records
            .iter()
            .filter(|r| r.kind == RecordKind::SentimentPositive)
            .count();
        assert_eq!(positives, 5);
        assert_eq!(out.records.len(), 5);
    }

    #[test]
    fn augmentation_is_deterministic_under_seed() {
        let sentences: Vec<Sentence> = (0..50)
            .map(|i| Sentence {
                doc_ref: "d".into(),
                index: i,
                text: format!("entry {i} was gorgeous"),
            })
            .collect();
        let lex = SentimentLexicon::default();
        let sp = SpecialTokens::default();
        let a = augment_corpus(sentences.iter(), &lex, 8, 99, &sp);
        let b = augment_corpus(sentences.iter(), &lex, 8, 99, &sp);
        assert_eq!(a.records, b.records);
        let c = augment_corpus(sentences.iter(), &lex, 8, 100, &sp);
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn lexicon_file_round_trip() {
        let text = "# custom\n[positive]\nsplendid\n[negative]\ndreary\nnot [a-z]+ splendid\n";
        let lex = SentimentLexicon::parse(text).unwrap();
        assert_eq!(lex.positive_entries().collect::<Vec<_>>(), vec!["splendid"]);
        assert_eq!(
            classify_sentiment(&sent("a dreary day"), &lex),
            SentimentClass::Negative
        );
        assert_eq!(
            classify_sentiment(&sent("not so splendid now"), &lex),
            SentimentClass::Mixed
        );
        assert!(SentimentLexicon::parse("lonely pattern\n").is_err());
    }

    #[test]
    fn rendered_sentiment_uses_label_token_and_word() {
        let rec = SentimentRecord {
            sentence: "it was terrific".into(),
            label: Sentiment::Positive,
            matched: "terrific".into(),
            source: SentenceRef {
                doc_ref: "d".into(),
                index: 0,
            },
        };
        assert_eq!(
            rec.rendered(&SpecialTokens::default()),
            "it was terrific [POS] positive"
        );
    }
}
