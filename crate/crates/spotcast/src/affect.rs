//! Sentiment scoring and personality profiling behind provider
//! interfaces, with deterministic built-in lexicon implementations.
//!
//! The built-in providers keep the whole pipeline offline; HTTP
//! providers can be substituted through the same traits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::normalize_text_lossy;

const SENTIMENT_TSV: &str = include_str!("../data/sentiment.tsv");
const PERSONALITY_TSV: &str = include_str!("../data/personality.tsv");

/// Sentiment magnitude (>= 0) and score in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentResult {
    pub magnitude: f64,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Opinion {
    Positive,
    Neutral,
    Negative,
}

impl Opinion {
    pub fn label(self) -> &'static str {
        match self {
            Opinion::Positive => "Positive",
            Opinion::Neutral => "Neutral",
            Opinion::Negative => "Negative",
        }
    }
}

#[derive(Debug, Error)]
pub enum AffectError {
    #[error("lexicon is missing or empty")]
    LexiconMissing,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("provider request failed: {0}")]
    Provider(String),
}

/// Component names of the personality vector, in storage order:
/// 5 trait components, then 12 needs, then 5 values.
pub const PERSONALITY_COMPONENTS: [&str; 22] = [
    "openness",
    "conscientiousness",
    "extraversion",
    "agreeableness",
    "emotional_range",
    "challenge",
    "closeness",
    "curiosity",
    "excitement",
    "harmony",
    "ideal",
    "liberty",
    "love",
    "practicality",
    "self_expression",
    "stability",
    "structure",
    "conservation",
    "openness_to_change",
    "hedonism",
    "self_enhancement",
    "self_transcendence",
];

/// Personality profile on a 0..100 scale per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonalityVector {
    pub big5: [f64; 5],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<f64>>,
    pub needs: [f64; 12],
    pub values: [f64; 5],
}

impl PersonalityVector {
    /// Flattened 22-component view in [`PERSONALITY_COMPONENTS`] order.
    pub fn components(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(22);
        out.extend_from_slice(&self.big5);
        out.extend_from_slice(&self.needs);
        out.extend_from_slice(&self.values);
        out
    }

    pub fn from_components(c: &[f64]) -> Option<Self> {
        if c.len() != 22 {
            return None;
        }
        let mut big5 = [0.0; 5];
        big5.copy_from_slice(&c[..5]);
        let mut needs = [0.0; 12];
        needs.copy_from_slice(&c[5..17]);
        let mut values = [0.0; 5];
        values.copy_from_slice(&c[17..22]);
        Some(PersonalityVector { big5, facets: None, needs, values })
    }
}

pub trait SentimentProvider {
    fn score(&self, text: &str) -> Result<SentimentResult, AffectError>;
}

pub trait PersonalityProvider {
    fn profile(&self, texts: &[String]) -> Result<PersonalityVector, AffectError>;
}

/// Token polarity lexicon, TSV `token<TAB>polarity`.
#[derive(Debug, Clone)]
pub struct SentimentLexicon {
    polarity: BTreeMap<String, f64>,
}

impl SentimentLexicon {
    pub fn builtin() -> Self {
        Self::from_tsv(SENTIMENT_TSV).expect("bundled sentiment lexicon is valid")
    }

    pub fn from_tsv(tsv: &str) -> Result<Self, AffectError> {
        let mut polarity = BTreeMap::new();
        for line in tsv.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let token = parts.next().ok_or(AffectError::LexiconMissing)?;
            let pol: f64 = parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or(AffectError::LexiconMissing)?;
            polarity.insert(token.to_string(), pol);
        }
        Ok(Self { polarity })
    }

    pub fn len(&self) -> usize {
        self.polarity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polarity.is_empty()
    }
}

/// Score a text with the lexicon: score is the mean polarity over polar
/// tokens (clamped to [-1, 1]), magnitude the mean absolute polarity over
/// polar tokens, so `magnitude >= |score|` always holds.
pub fn score_text(text: &str, lexicon: &SentimentLexicon) -> Result<SentimentResult, AffectError> {
    if lexicon.is_empty() {
        return Err(AffectError::LexiconMissing);
    }
    let normalized = normalize_text_lossy(text);
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut polar = 0usize;
    for token in normalized.split_whitespace() {
        if let Some(&p) = lexicon.polarity.get(token) {
            sum += p;
            abs_sum += p.abs();
            polar += 1;
        }
    }
    let denom = polar.max(1) as f64;
    Ok(SentimentResult {
        magnitude: abs_sum / denom,
        score: (sum / denom).clamp(-1.0, 1.0),
    })
}

impl SentimentProvider for SentimentLexicon {
    fn score(&self, text: &str) -> Result<SentimentResult, AffectError> {
        score_text(text, self)
    }
}

/// Route a sentiment result into one of the three opinion communities.
pub fn classify_opinion(r: SentimentResult) -> Opinion {
    if r.magnitude > 0.0 && r.score > 0.0 {
        Opinion::Positive
    } else if r.magnitude > 0.0 && r.score < 0.0 {
        Opinion::Negative
    } else {
        Opinion::Neutral
    }
}

/// Trait lexicon, TSV `token<TAB>trait<TAB>weight`.
#[derive(Debug, Clone)]
pub struct PersonalityLexicon {
    // token -> (component index, weight)
    weights: BTreeMap<String, Vec<(usize, f64)>>,
}

impl PersonalityLexicon {
    pub fn builtin() -> Self {
        Self::from_tsv(PERSONALITY_TSV).expect("bundled personality lexicon is valid")
    }

    pub fn from_tsv(tsv: &str) -> Result<Self, AffectError> {
        let index: BTreeMap<&str, usize> = PERSONALITY_COMPONENTS
            .iter()
            .enumerate()
            .map(|(i, n)| (*n, i))
            .collect();
        let mut weights: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
        for line in tsv.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let token = parts.next().ok_or(AffectError::LexiconMissing)?;
            let trait_name = parts.next().ok_or(AffectError::LexiconMissing)?;
            let weight: f64 = parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or(AffectError::LexiconMissing)?;
            let idx = *index
                .get(trait_name)
                .ok_or_else(|| AffectError::Provider(format!("unknown trait {trait_name}")))?;
            weights.entry(token.to_string()).or_default().push((idx, weight));
        }
        Ok(Self { weights })
    }
}

/// Built-in personality stub: per component, the weighted hit rate over
/// all tokens of the corpus, min-max normalized across components to
/// 0..100. A corpus with zero lexicon hits maps to all zeros.
pub fn profile(
    texts: &[String],
    lexicon: &PersonalityLexicon,
) -> Result<PersonalityVector, AffectError> {
    if texts.is_empty() || texts.iter().all(|t| normalize_text_lossy(t).is_empty()) {
        return Err(AffectError::EmptyCorpus);
    }
    let mut hits = [0.0f64; 22];
    let mut total_tokens = 0usize;
    for text in texts {
        let normalized = normalize_text_lossy(text);
        for token in normalized.split_whitespace() {
            total_tokens += 1;
            if let Some(entries) = lexicon.weights.get(token) {
                for &(idx, w) in entries {
                    hits[idx] += w;
                }
            }
        }
    }
    let n = total_tokens.max(1) as f64;
    let rates: Vec<f64> = hits.iter().map(|h| h / n).collect();
    let min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = if max > min {
        rates.iter().map(|r| (r - min) / (max - min) * 100.0).collect()
    } else {
        vec![0.0; 22]
    };
    Ok(PersonalityVector::from_components(&scaled).expect("22 components"))
}

impl PersonalityProvider for PersonalityLexicon {
    fn profile(&self, texts: &[String]) -> Result<PersonalityVector, AffectError> {
        profile(texts, self)
    }
}

/// HTTP sentiment provider: POST `{"text": ...}`, expects
/// `{"magnitude": .., "score": ..}`.
pub struct HttpSentimentProvider {
    pub endpoint: String,
}

impl SentimentProvider for HttpSentimentProvider {
    fn score(&self, text: &str) -> Result<SentimentResult, AffectError> {
        let client = reqwest::blocking::Client::new();
        let resp: SentimentResult = client
            .post(&self.endpoint)
            .json(&serde_json::json!({ "text": text }))
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| AffectError::Provider(e.to_string()))?
            .json()
            .map_err(|e| AffectError::Provider(e.to_string()))?;
        Ok(resp)
    }
}

/// HTTP personality provider: POST `{"texts": [...]}`, expects
/// `{"components": [... 22 values ...]}` on the 0..100 scale.
pub struct HttpPersonalityProvider {
    pub endpoint: String,
}

impl PersonalityProvider for HttpPersonalityProvider {
    fn profile(&self, texts: &[String]) -> Result<PersonalityVector, AffectError> {
        #[derive(Deserialize)]
        struct Resp {
            components: Vec<f64>,
        }
        let client = reqwest::blocking::Client::new();
        let resp: Resp = client
            .post(&self.endpoint)
            .json(&serde_json::json!({ "texts": texts }))
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| AffectError::Provider(e.to_string()))?
            .json()
            .map_err(|e| AffectError::Provider(e.to_string()))?;
        PersonalityVector::from_components(&resp.components)
            .ok_or_else(|| AffectError::Provider("expected 22 components".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn all_neutral_text() {
        let lex = SentimentLexicon::builtin();
        let r = score_text("the weather station reported data", &lex).unwrap();
        assert_eq!(r.score, 0.0);
        assert_eq!(r.magnitude, 0.0);
    }

    #[test]
    fn uniform_positive() {
        let lex = SentimentLexicon::builtin();
        let r = score_text("great great", &lex).unwrap();
        assert_eq!(r.score, 1.0);
        assert_eq!(r.magnitude, 1.0);
    }

    #[test]
    fn mixed_polarity() {
        let lex = SentimentLexicon::builtin();
        // good = +1, bad = -1 in the bundled lexicon
        let r = score_text("good bad", &lex).unwrap();
        assert_eq!(r.score, 0.0);
        assert!(r.magnitude > 0.0);
    }

    #[test]
    fn magnitude_dominates_score() {
        let lex = SentimentLexicon::builtin();
        for text in ["great", "bad bad good", "cool slow", "nothing polar here"] {
            let r = score_text(text, &lex).unwrap();
            assert!(r.magnitude >= r.score.abs());
        }
    }

    #[test]
    fn score_invariant_under_normalization() {
        let lex = SentimentLexicon::builtin();
        let raw = "  GREAT   Café bad ";
        let a = score_text(raw, &lex).unwrap();
        let b = score_text(&normalize_text_lossy(raw), &lex).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_lexicon_rejected() {
        let lex = SentimentLexicon::from_tsv("").unwrap();
        assert!(matches!(score_text("x", &lex), Err(AffectError::LexiconMissing)));
    }

    #[test]
    fn classify_rules() {
        assert_eq!(classify_opinion(SentimentResult { magnitude: 0.3, score: 0.7 }), Opinion::Positive);
        assert_eq!(classify_opinion(SentimentResult { magnitude: 0.0, score: 0.0 }), Opinion::Neutral);
        assert_eq!(classify_opinion(SentimentResult { magnitude: 0.4, score: -0.1 }), Opinion::Negative);
        assert_eq!(classify_opinion(SentimentResult { magnitude: 0.0, score: 0.1 }), Opinion::Neutral);
        assert_eq!(classify_opinion(SentimentResult { magnitude: 0.5, score: 0.0 }), Opinion::Neutral);
    }

    #[test]
    fn profile_empty_corpus() {
        let lex = PersonalityLexicon::builtin();
        assert!(matches!(profile(&[], &lex), Err(AffectError::EmptyCorpus)));
    }

    #[test]
    fn profile_zero_hits_all_zero() {
        let lex = PersonalityLexicon::builtin();
        let v = profile(&["zzz qqq www".to_string()], &lex).unwrap();
        assert!(v.components().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn profile_stable_fixture() {
        let lex = PersonalityLexicon::builtin();
        let texts = vec![
            "i'm at the museum with friends".to_string(),
            "great party and beer tonight".to_string(),
            "work meeting then gym".to_string(),
        ];
        let a = profile(&texts, &lex).unwrap();
        let b = profile(&texts, &lex).unwrap();
        assert_eq!(a, b);
        // golden values: max component must be exactly 100 when any hit exists
        let comps = a.components();
        assert!((comps.iter().cloned().fold(f64::MIN, f64::max) - 100.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn profile_bounds_and_order_free(
            texts in proptest::collection::vec("[a-z ]{1,30}", 1..6)
        ) {
            let lex = PersonalityLexicon::builtin();
            prop_assume!(texts.iter().any(|t| !normalize_text_lossy(t).is_empty()));
            let v = profile(&texts, &lex).unwrap();
            for c in v.components() {
                prop_assert!((0.0..=100.0).contains(&c));
            }
            let mut rev = texts.clone();
            rev.reverse();
            prop_assert_eq!(profile(&rev, &lex).unwrap(), v);
        }

        #[test]
        fn classes_partition_space(mag in 0.0f64..2.0, score in -1.0f64..1.0) {
            let r = SentimentResult { magnitude: mag, score };
            // total and deterministic: exactly one class
            let c = classify_opinion(r);
            let again = classify_opinion(r);
            prop_assert_eq!(c, again);
        }
    }
}
